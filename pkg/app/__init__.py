"""
mfem-lumped application package
Configuration, logging bootstrap and command handlers
"""

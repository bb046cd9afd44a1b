"""
mfem-lumped Services Package
Mesh generation and IO, iterative solver, matrix export
"""

from .conjugateGradient import ConjugateGradientSolver
from .meshGenerator import MeshGenerator, get_mesh_generator

__all__ = ['ConjugateGradientSolver', 'MeshGenerator', 'get_mesh_generator']

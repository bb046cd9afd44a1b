"""
mfem-lumped Core Package
Numerical kernel: reference elements, meshes, assembly, solution, post-processing
"""

from .assembly import ProblemData, build_dofmap
from .exceptions import InputError, MfemError, SolverError
from .mesh import Mesh, build_mesh
from .refelem import SchemeOrder, reference_element

__all__ = [
    'InputError', 'Mesh', 'MfemError', 'ProblemData', 'SchemeOrder', 'SolverError',
    'build_dofmap', 'build_mesh', 'reference_element',
]

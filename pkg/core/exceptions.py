"""Exception hierarchy for the mixed finite element kernel.

Errors fall into two families. ``InputError`` covers anything the caller
handed in (bad meshes, unknown names, undefined element combinations);
``SolverError`` covers numerical breakdowns during assembly and solves.
The CLI maps the two families onto distinct exit codes.
"""
from typing import Optional


class MfemError(Exception):
    """Base class for all errors raised by this package"""


class InputError(MfemError):
    """Invalid input: mesh, case, element or parameter"""


class SolverError(MfemError):
    """Numerical failure during assembly, reduction or solution"""


# Reference elements

class UndefinedCombination(InputError):
    """Requested (shape, order) pair has no element definition"""


class IndexOutOfRange(InputError, IndexError):
    """Basis index outside the element's basis"""


class ConditioningError(SolverError):
    """Local construction matrix too ill-conditioned to invert reliably"""


# Meshes

class InvalidMesh(InputError):
    """Malformed mesh data (bad ids, wrong vertex counts, non-finite coordinates)"""


class NonConforming(InputError):
    """Hanging node, partial facet overlap or over-shared facet"""


class InvertedCell(InputError):
    """Cell with non-positive Jacobian determinant"""

    def __init__(self, cell: int, det: float):
        super().__init__(f"Cell {cell} has non-positive Jacobian determinant {det:.3e}")
        self.cell = cell
        self.det = det


class NonAffineCell(InputError):
    """Cell whose vertices are not the affine image of the reference cell"""

    def __init__(self, cell: int, deviation: float):
        super().__init__(f"Cell {cell} deviates from its affine image by {deviation:.3e}")
        self.cell = cell
        self.deviation = deviation


class UnknownFamily(InputError):
    """Unknown mesh generator family"""


class ParseError(InputError):
    """Mesh text could not be parsed"""

    def __init__(self, message: str, line: Optional[int] = None):
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(f"{prefix}{message}")
        self.line = line


# Harness

class UnknownCase(InputError):
    """Unknown manufactured-solution case"""


class CaseMismatch(InputError):
    """Case and mesh family have different dimensions"""


class CaseInconsistent(InputError):
    """Manufactured source does not match the divergence of the velocity"""


class DegenerateSequence(InputError):
    """Error/mesh-size sequence from which no order can be computed"""


class SystemTooLarge(InputError):
    """Dense oracle requested for a system above the size guard"""


# Numerical failures

class SingularConductivity(SolverError):
    """Conductivity tensor not invertible at a quadrature point"""


class NonSPDBlock(SolverError):
    """A lumped mass block failed Cholesky factorization"""

    def __init__(self, cluster: int, detail: str = ""):
        message = f"Mass block of cluster {cluster} is not symmetric positive definite"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
        self.cluster = cluster


class NoConvergence(SolverError):
    """Iterative solver did not reach the requested tolerance"""

    def __init__(self, iterations: int, residual: float):
        super().__init__(
            f"Conjugate gradients stopped after {iterations} iterations "
            f"with relative residual {residual:.3e}"
        )
        self.iterations = iterations
        self.residual = residual


class SingularSystem(SolverError):
    """Dense saddle-point factorization detected a (numerically) singular system"""


class SingularLocalSystem(SolverError):
    """Per-cell post-processing system is singular"""


class ResidualTooLarge(SolverError):
    """Recovered solution violates mass conservation or the velocity equation"""

    def __init__(self, which: str, value: float, bound: float):
        super().__init__(f"{which} residual {value:.3e} exceeds {bound:.1e}")
        self.which = which
        self.value = value
        self.bound = bound

"""Local velocity elimination and the cell-centered pressure system.

Each lumped mass block is factored once; the Schur complement
``S = B M^-1 B^T`` is the sum of one small dense term per cluster,

    S_c = W_c^T W_c,   W_c = L_c^-1 B_c^T,   M_c = L_c L_c^T,

where ``B_c`` holds the columns of B belonging to the cluster restricted to
its nonzero rows. The velocity is recovered cluster by cluster from the
same factors.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from core.assembly import LumpedMassMatrix
from core.exceptions import NonSPDBlock, ResidualTooLarge, SingularSystem, SystemTooLarge
from services.conjugateGradient import ConjugateGradientSolver

logger = logging.getLogger(__name__)

DENSE_LIMIT = 5000
PIVOT_RATIO = 1e-14
POLISH_MIN_ITERATIONS = 50
RECOVERY_TOL = 1e-10


@dataclass(frozen=True)
class ClusterFactor:
    members: np.ndarray
    factor: np.ndarray

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve((self.factor, True), rhs)


@dataclass
class SchurSystem:
    matrix: sp.csr_matrix
    rhs: np.ndarray
    factors: List[ClusterFactor] = field(repr=False)
    div: sp.csr_matrix = field(repr=False)
    g_vec: np.ndarray = field(repr=False)
    f_vec: np.ndarray = field(repr=False)

    @property
    def n_velocity(self) -> int:
        return self.div.shape[1]

    @property
    def n_pressure(self) -> int:
        return self.div.shape[0]

    def mass_solve(self, v: np.ndarray) -> np.ndarray:
        """M^-1 v by block solves"""
        out = np.zeros_like(v, dtype=float)
        for f in self.factors:
            out[f.members] = f.solve(v[f.members])
        return out


@dataclass
class PressureSolution:
    values: np.ndarray
    iterations: int
    residual: float


@dataclass
class DiscreteSolution:
    u: np.ndarray
    p: np.ndarray
    iterations: int = 0
    residual: float = 0.0
    conservation: float = 0.0
    equation_residual: float = 0.0

    @property
    def residuals(self) -> dict:
        return {
            "iterations": self.iterations,
            "cg_residual": self.residual,
            "conservation": self.conservation,
            "equation_residual": self.equation_residual,
        }


def reduce(mass: LumpedMassMatrix, div: sp.spmatrix, g_vec: np.ndarray,
           f_vec: np.ndarray) -> SchurSystem:
    """Eliminate the velocity cluster by cluster.

    Args:
        mass: Lumped velocity mass matrix
        div: Divergence matrix (pressure rows, velocity columns)
        g_vec: Boundary term, velocity sized
        f_vec: Source term, pressure sized

    Returns:
        SchurSystem with S, its right-hand side f_vec - B M^-1 g_vec and
        the retained block factors

    Raises:
        NonSPDBlock: a mass block cannot be factored
    """
    div_csc = sp.csc_matrix(div)
    n_pressure = div.shape[0]
    rows, cols, vals = [], [], []
    factors = []
    for block in mass.blocks:
        try:
            factor = scipy.linalg.cholesky(block.matrix, lower=True)
        except np.linalg.LinAlgError as e:
            raise NonSPDBlock(block.cluster, str(e))
        factors.append(ClusterFactor(block.members, factor))

        columns = div_csc[:, block.members]
        touched = np.unique(columns.indices)
        if touched.size == 0:
            continue
        local = columns[touched].toarray()
        W = scipy.linalg.solve_triangular(factor, local.T, lower=True)
        S_c = W.T @ W
        S_c = 0.5 * (S_c + S_c.T)
        r, c = np.meshgrid(touched, touched, indexing="ij")
        rows.append(r.ravel())
        cols.append(c.ravel())
        vals.append(S_c.ravel())

    if rows:
        matrix = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n_pressure, n_pressure),
        ).tocsr()
    else:
        matrix = sp.csr_matrix((n_pressure, n_pressure))

    system = SchurSystem(matrix, np.zeros(n_pressure), factors, sp.csr_matrix(div),
                         np.asarray(g_vec, dtype=float), np.asarray(f_vec, dtype=float))
    system.rhs = system.f_vec - system.div @ system.mass_solve(system.g_vec)
    logger.debug(f"Schur system: n={n_pressure}, nnz={matrix.nnz}, {len(factors)} clusters")
    return system


def solve(system: SchurSystem, tol: float = 1e-12,
          solver: Optional[ConjugateGradientSolver] = None) -> PressureSolution:
    """Solve S p = rhs with Jacobi-preconditioned CG.

    The tolerance is relative to the smaller of ||rhs|| and ||f_vec||
    (when the source is nonzero) so that recovery meets the mass
    conservation bound relative to ||f_vec||. The accepted iterate is then
    polished towards the rounding floor.
    """
    solver = solver or ConjugateGradientSolver(tol=tol)
    reference = float(np.linalg.norm(system.rhs))
    source_norm = float(np.linalg.norm(system.f_vec))
    if source_norm > 0.0:
        reference = min(reference, source_norm)
    result = solver.solve(system.matrix, system.rhs, reference=reference, tol=tol)
    if result.iterations == 0:
        return PressureSolution(result.x, 0, result.relative_residual)
    p, extra, residual = solver.polish(
        system.matrix, system.rhs, result.x, maxiter=max(result.iterations, POLISH_MIN_ITERATIONS)
    )
    return PressureSolution(p, result.iterations + extra, residual / reference)


def recover_velocity(system: SchurSystem, p: np.ndarray) -> np.ndarray:
    """u = M^-1 (g_vec + B^T p)"""
    return system.mass_solve(system.g_vec + system.div.T @ p)


def conservation_residual(system: SchurSystem, u: np.ndarray) -> float:
    """||B u - f_vec|| relative to ||f_vec|| (to ||rhs|| when f_vec vanishes)"""
    defect = float(np.linalg.norm(system.div @ u - system.f_vec))
    scale = float(np.linalg.norm(system.f_vec)) or float(np.linalg.norm(system.rhs))
    return defect / scale if scale > 0.0 else defect


def equation_residual(mass: LumpedMassMatrix, system: SchurSystem, u: np.ndarray,
                      p: np.ndarray) -> float:
    """||M u - B^T p - g_vec|| relative to ||g_vec|| + ||B^T p||"""
    flux = system.div.T @ p
    defect = float(np.linalg.norm(mass.matvec(u) - flux - system.g_vec))
    scale = float(np.linalg.norm(system.g_vec)) + float(np.linalg.norm(flux))
    return defect / scale if scale > 0.0 else defect


def solve_reduced(mass: LumpedMassMatrix, div: sp.spmatrix, g_vec: np.ndarray,
                  f_vec: np.ndarray, tol: float = 1e-12,
                  solver: Optional[ConjugateGradientSolver] = None) -> Tuple[SchurSystem, DiscreteSolution]:
    """reduce, solve and recover in one call

    Raises:
        ResidualTooLarge: mass conservation above 10 * tol, or the velocity
            equation residual above RECOVERY_TOL
    """
    system = reduce(mass, div, g_vec, f_vec)
    pressure = solve(system, tol, solver)
    u = recover_velocity(system, pressure.values)
    solution = DiscreteSolution(
        u=u,
        p=pressure.values,
        iterations=pressure.iterations,
        residual=pressure.residual,
        conservation=conservation_residual(system, u),
        equation_residual=equation_residual(mass, system, u, pressure.values),
    )
    if solution.conservation > 10 * tol:
        raise ResidualTooLarge("Mass conservation", solution.conservation, 10 * tol)
    if solution.equation_residual > RECOVERY_TOL:
        raise ResidualTooLarge("Velocity equation", solution.equation_residual, RECOVERY_TOL)
    return system, solution


MassLike = Union[LumpedMassMatrix, sp.spmatrix, np.ndarray]


def _dense(matrix: MassLike) -> np.ndarray:
    if isinstance(matrix, LumpedMassMatrix):
        return matrix.to_dense()
    if sp.issparse(matrix):
        return matrix.toarray()
    return np.asarray(matrix, dtype=float)


def solve_saddle_dense(mass: MassLike, div: Union[sp.spmatrix, np.ndarray], g_vec: np.ndarray,
                       f_vec: np.ndarray, limit: int = DENSE_LIMIT,
                       pivot_ratio: float = PIVOT_RATIO) -> DiscreteSolution:
    """Direct LU solve of [[M, -B^T], [B, 0]] [u; p] = [g_vec; f_vec].

    Raises:
        SystemTooLarge: more than ``limit`` unknowns
        SingularSystem: pivot ratio of the factorization below ``pivot_ratio``
    """
    B = _dense(div)
    n_p, n_u = B.shape
    if n_u + n_p >= limit:
        raise SystemTooLarge(f"Dense oracle limited to {limit} unknowns, got {n_u + n_p}")
    M = _dense(mass)
    K = np.block([[M, -B.T], [B, np.zeros((n_p, n_p))]])
    rhs = np.concatenate([g_vec, f_vec])
    lu, piv = scipy.linalg.lu_factor(K)
    pivots = np.abs(np.diag(lu))
    if pivots.max() == 0.0 or pivots.min() / pivots.max() < pivot_ratio:
        raise SingularSystem(
            f"Saddle-point system is singular (pivot ratio {pivots.min() / max(pivots.max(), 1e-300):.2e})"
        )
    x = scipy.linalg.lu_solve((lu, piv), rhs)
    u, p = x[:n_u], x[n_u:]
    defect = float(np.linalg.norm(B @ u - f_vec))
    scale = float(np.linalg.norm(f_vec))
    return DiscreteSolution(u=u, p=p, conservation=defect / scale if scale > 0 else defect)

"""Jacobi-preconditioned conjugate gradients for SPD sparse systems"""
import logging
import time
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from core.exceptions import NoConvergence

MIN_ITERATIONS = 10000
ITERATION_FACTOR = 10
MAX_RESTARTS = 3
POLISH_FACTOR = 1e-3


def pcg(A, b: np.ndarray, x0: Optional[np.ndarray] = None, tol: float = 1e-12,
        maxiter: int = 1000, diagonal: Optional[np.ndarray] = None) -> Tuple[np.ndarray, Dict[str, Any]]:
    """
    Preconditioned conjugate gradient iteration for A x = b.

    Args:
        A: Symmetric positive definite operator providing ``A @ v``
        b: Right-hand side
        x0: Initial guess (zero if omitted)
        tol: Absolute tolerance for the 2-norm of the recursive residual
        maxiter: Maximum number of iterations
        diagonal: Jacobi preconditioner diagonal (identity if omitted)

    Returns:
        Solution and an info dict with 'niter', 'success' and 'res_norm'
    """
    n = b.shape[0]
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    inv_diag = np.ones(n) if diagonal is None else 1.0 / diagonal

    r = b - A @ x
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    res = float(np.linalg.norm(r))

    m = 0
    for m in range(1, maxiter + 1):
        if res <= tol:
            m -= 1
            break
        v = A @ p
        curvature = float(v @ p)
        if curvature <= 0.0:
            # direction of non-positive curvature: A is not SPD
            break
        step = rz / curvature
        x += step * p
        r -= step * v
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
        res = float(np.linalg.norm(r))

    info = {"niter": m, "success": res <= tol, "res_norm": res}
    return x, info


@dataclass
class SolveResult:
    x: np.ndarray
    iterations: int
    residual: float
    relative_residual: float


class ConjugateGradientSolver:
    """CG with Jacobi preconditioning and a true-residual acceptance test.

    The recursive residual can drift from ``b - A x`` near machine
    precision, so on apparent convergence the true residual is checked and
    the iteration restarted from the current iterate if it is too large.
    """

    def __init__(self, tol: float = 1e-12, min_iterations: int = MIN_ITERATIONS,
                 iteration_factor: int = ITERATION_FACTOR):
        self.tol = tol
        self.min_iterations = min_iterations
        self.iteration_factor = iteration_factor
        self.logger = logging.getLogger("services.conjugate_gradient")

        self.total_solves = 0
        self.total_iterations = 0
        self.total_failures = 0
        self.total_time = 0.0

    def max_iterations(self, n: int) -> int:
        return max(self.iteration_factor * n, self.min_iterations)

    def solve(self, A: sp.spmatrix, b: np.ndarray, reference: Optional[float] = None,
              tol: Optional[float] = None) -> SolveResult:
        """
        Solve A x = b to ||A x - b|| <= tol * reference

        Args:
            A: SPD sparse matrix
            b: Right-hand side
            reference: Norm the tolerance is relative to (||b|| if omitted)
            tol: Relative tolerance (solver default if omitted)

        Returns:
            SolveResult with solution, iteration count and final residual
        """
        tol = self.tol if tol is None else tol
        start = time.time()
        self.total_solves += 1
        n = b.shape[0]
        reference = float(np.linalg.norm(b)) if reference is None else reference

        if n == 0 or reference == 0.0:
            self.total_time += time.time() - start
            return SolveResult(np.zeros(n), 0, 0.0, 0.0)

        A = sp.csr_matrix(A)
        diagonal = A.diagonal()
        if np.any(diagonal <= 0.0):
            diagonal = None
            self.logger.warning("Non-positive diagonal entry; running CG without preconditioner")

        threshold = tol * reference
        budget = self.max_iterations(n)
        x = None
        iterations = 0
        residual = np.inf
        for attempt in range(MAX_RESTARTS + 1):
            x, info = pcg(A, b, x0=x, tol=threshold, maxiter=budget - iterations, diagonal=diagonal)
            iterations += info["niter"]
            residual = float(np.linalg.norm(b - A @ x))
            if residual <= threshold:
                break
            if iterations >= budget or not info["success"]:
                break
            self.logger.debug(
                f"CG restart {attempt + 1}: true residual {residual:.3e} above {threshold:.3e}"
            )

        elapsed = time.time() - start
        self.total_time += elapsed
        self.total_iterations += iterations
        if residual > threshold:
            self.total_failures += 1
            self.logger.error(
                f"CG failed after {iterations} iterations: residual {residual:.3e} > {threshold:.3e}"
            )
            raise NoConvergence(iterations, residual / reference)

        self.logger.info(
            f"CG converged in {iterations} iterations (n={n}, residual {residual / reference:.3e}, "
            f"{elapsed:.2f}s)"
        )
        return SolveResult(x, iterations, residual, residual / reference)

    def polish(self, A: sp.spmatrix, b: np.ndarray, x: np.ndarray, factor: float = POLISH_FACTOR,
               maxiter: int = 50) -> Tuple[np.ndarray, int, float]:
        """
        Continue CG from an accepted iterate towards the rounding floor

        The iterate is replaced only if its true residual drops; stagnation
        at the floor is not an error.

        Args:
            A: SPD sparse matrix
            b: Right-hand side
            x: Accepted iterate
            factor: Target reduction of the current true residual
            maxiter: Iteration budget

        Returns:
            Iterate, iterations spent and its true residual norm
        """
        A = sp.csr_matrix(A)
        residual = float(np.linalg.norm(b - A @ x))
        if residual == 0.0:
            return x, 0, residual
        diagonal = A.diagonal()
        if np.any(diagonal <= 0.0):
            diagonal = None
        candidate, info = pcg(A, b, x0=x, tol=factor * residual, maxiter=maxiter, diagonal=diagonal)
        self.total_iterations += info["niter"]
        refined = float(np.linalg.norm(b - A @ candidate))
        self.logger.debug(f"CG polish: residual {residual:.3e} -> {refined:.3e} in {info['niter']} iterations")
        if refined < residual:
            return candidate, info["niter"], refined
        return x, info["niter"], residual

    def get_stats(self) -> Dict[str, Any]:
        return {
            "total_solves": self.total_solves,
            "total_iterations": self.total_iterations,
            "total_failures": self.total_failures,
            "total_time": self.total_time,
            "average_iterations": (
                self.total_iterations / self.total_solves if self.total_solves > 0 else 0
            ),
        }

    def reset_stats(self):
        self.total_solves = 0
        self.total_iterations = 0
        self.total_failures = 0
        self.total_time = 0.0

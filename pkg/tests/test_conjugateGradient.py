"""
Tests for the Jacobi-preconditioned CG solver
"""
import numpy as np
import pytest
import scipy.sparse as sp

from core.exceptions import NoConvergence
from services.conjugateGradient import ConjugateGradientSolver, pcg


def random_spd(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    return A @ A.T + n * np.eye(n)


class TestPcg:
    """The bare iteration"""

    def test_scalar_system(self):
        x, info = pcg(np.array([[2.0]]), np.array([4.0]), tol=1e-14)
        assert x[0] == pytest.approx(2.0)
        assert info["success"]
        assert info["niter"] == 1

    def test_zero_iterations_for_exact_guess(self):
        A = random_spd(5)
        x0 = np.arange(5.0)
        x, info = pcg(A, A @ x0, x0=x0, tol=1e-10)
        assert info["niter"] == 0
        np.testing.assert_allclose(x, x0)

    def test_stops_on_indefinite_operator(self):
        A = np.diag([1.0, -1.0])
        x, info = pcg(A, np.array([1.0, 1.0]), tol=1e-12, maxiter=10)
        assert not info["success"]


class TestConjugateGradientSolver:
    """Solver with restarts and statistics"""

    def test_matches_dense_solve(self):
        A = random_spd(50, seed=1)
        b = np.random.default_rng(2).standard_normal(50)
        solver = ConjugateGradientSolver(tol=1e-12)
        result = solver.solve(sp.csr_matrix(A), b)
        np.testing.assert_allclose(result.x, np.linalg.solve(A, b), rtol=1e-9, atol=1e-11)
        assert result.relative_residual <= 1e-12
        assert 0 < result.iterations <= 50 + 10

    def test_zero_rhs(self):
        solver = ConjugateGradientSolver()
        result = solver.solve(sp.identity(4, format="csr"), np.zeros(4))
        assert result.iterations == 0
        np.testing.assert_array_equal(result.x, np.zeros(4))

    def test_iteration_budget(self):
        solver = ConjugateGradientSolver(min_iterations=100, iteration_factor=10)
        assert solver.max_iterations(5) == 100
        assert solver.max_iterations(50) == 500

    def test_no_convergence(self):
        A = random_spd(40, seed=4)
        b = np.random.default_rng(5).standard_normal(40)
        solver = ConjugateGradientSolver(tol=1e-14, min_iterations=1, iteration_factor=0)
        with pytest.raises(NoConvergence) as excinfo:
            solver.solve(sp.csr_matrix(A), b)
        assert excinfo.value.iterations == 1
        assert solver.get_stats()["total_failures"] == 1

    def test_stats(self):
        solver = ConjugateGradientSolver(tol=1e-10)
        A = sp.diags([4.0, 2.0, 1.0]).tocsr()
        solver.solve(A, np.ones(3))
        solver.solve(A, np.ones(3))
        stats = solver.get_stats()
        assert stats["total_solves"] == 2
        assert stats["total_failures"] == 0
        # Jacobi makes a diagonal system a one-step solve
        assert stats["average_iterations"] == 1
        solver.reset_stats()
        assert solver.get_stats()["total_solves"] == 0


class TestPolish:
    """Continuing CG from an accepted iterate"""

    def test_reduces_loose_residual(self):
        A = sp.csr_matrix(random_spd(60, seed=6))
        b = np.random.default_rng(7).standard_normal(60)
        solver = ConjugateGradientSolver(tol=1e-4)
        loose = solver.solve(A, b)
        x, iterations, residual = solver.polish(A, b, loose.x, maxiter=200)
        assert iterations > 0
        assert residual < 1e-2 * loose.residual
        assert residual == pytest.approx(np.linalg.norm(b - A @ x))
        assert solver.get_stats()["total_iterations"] == loose.iterations + iterations

    def test_exact_iterate_is_kept(self):
        A = sp.diags([4.0, 2.0, 1.0]).tocsr()
        x0 = np.array([1.0, 2.0, 3.0])
        x, iterations, residual = ConjugateGradientSolver().polish(A, A @ x0, x0)
        assert iterations == 0
        assert residual == 0.0
        np.testing.assert_array_equal(x, x0)

    def test_never_returns_a_worse_iterate(self):
        A = sp.csr_matrix(random_spd(30, seed=8))
        b = np.random.default_rng(9).standard_normal(30)
        x0 = np.linalg.solve(A.toarray(), b)
        before = float(np.linalg.norm(b - A @ x0))
        _, _, residual = ConjugateGradientSolver().polish(A, b, x0, maxiter=5)
        assert residual <= before

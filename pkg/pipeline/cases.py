"""Manufactured-solution cases for -div(K grad p) = f, p = g on the boundary.

All fields are vectorized over points of shape (n, d). The velocity is
u = -K grad p and the source f = div u.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from core.assembly import ProblemData
from core.exceptions import CaseInconsistent, CaseMismatch, UnknownCase

logger = logging.getLogger(__name__)

PI = np.pi

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ManufacturedCase:
    name: str
    dim: int
    pressure: Field
    gradient: Field
    conductivity: Field
    source: Field
    bounds: Tuple[float, float]
    description: str = ""
    default_family: Optional[str] = None

    def velocity(self, x: np.ndarray) -> np.ndarray:
        return -np.einsum("nij,nj->ni", self.conductivity(x), self.gradient(x))

    def boundary(self, x: np.ndarray) -> np.ndarray:
        return self.pressure(x)

    def problem(self) -> ProblemData:
        return ProblemData(self.conductivity, self.source, self.boundary, self.bounds)


# paper2d: pressure and conductivity on the unit square shifted to (-1/2, 1/2)^2

def _sine2d_K(x: np.ndarray) -> np.ndarray:
    X, Y = x[:, 0] - 0.5, x[:, 1] - 0.5
    K = np.empty((len(x), 2, 2))
    K[:, 0, 0] = 4 + (X + 2) ** 2 + Y**2
    K[:, 0, 1] = K[:, 1, 0] = 1 + np.sin(X * Y)
    K[:, 1, 1] = 2.0
    return K


def _sine2d_p(x: np.ndarray) -> np.ndarray:
    X, Y = x[:, 0] - 0.5, x[:, 1] - 0.5
    return np.sin(PI * X) * np.sin(PI * Y)


def _sine2d_grad(x: np.ndarray) -> np.ndarray:
    X, Y = x[:, 0] - 0.5, x[:, 1] - 0.5
    return PI * np.column_stack([
        np.cos(PI * X) * np.sin(PI * Y),
        np.sin(PI * X) * np.cos(PI * Y),
    ])


def _sine2d_f(x: np.ndarray) -> np.ndarray:
    X, Y = x[:, 0] - 0.5, x[:, 1] - 0.5
    K = _sine2d_K(x)
    p = _sine2d_p(x)
    px, py = _sine2d_grad(x).T
    pxy = PI**2 * np.cos(PI * X) * np.cos(PI * Y)
    c = np.cos(X * Y)
    return -(
        (2 * (X + 2) + X * c) * px
        + Y * c * py
        - PI**2 * (K[:, 0, 0] + K[:, 1, 1]) * p
        + 2 * K[:, 0, 1] * pxy
    )


# smooth3d: K = I + diag(x, y, z) / 2

def _smooth_K(x: np.ndarray) -> np.ndarray:
    K = np.zeros((len(x), 3, 3))
    for k in range(3):
        K[:, k, k] = 1 + 0.5 * x[:, k]
    return K


def _smooth_p(x: np.ndarray) -> np.ndarray:
    return np.prod(np.sin(PI * x), axis=1)


def _smooth_grad(x: np.ndarray) -> np.ndarray:
    s = np.sin(PI * x)
    c = np.cos(PI * x)
    return PI * np.column_stack([
        c[:, 0] * s[:, 1] * s[:, 2],
        s[:, 0] * c[:, 1] * s[:, 2],
        s[:, 0] * s[:, 1] * c[:, 2],
    ])


def _smooth_f(x: np.ndarray) -> np.ndarray:
    p = _smooth_p(x)
    grad = _smooth_grad(x)
    return -np.sum(0.5 * grad - (1 + 0.5 * x) * PI**2 * p[:, None], axis=1)


# Dimension-generic cases

_LINEAR_GRADIENT = {2: np.array([1.0, -2.0]), 3: np.array([1.0, -2.0, 0.5])}
_LINEAR_K = {
    2: np.array([[2.0, 0.5], [0.5, 1.0]]),
    3: np.array([[2.0, 0.5, 0.0], [0.5, 1.0, 0.2], [0.0, 0.2, 1.5]]),
}


def _paper2d(dim: int) -> ManufacturedCase:
    return ManufacturedCase(
        name="paper2d", dim=2, pressure=_sine2d_p, gradient=_sine2d_grad,
        conductivity=_sine2d_K, source=_sine2d_f, bounds=(0.5, 20.0),
        description="sin(pi X) sin(pi Y) with full variable K, X = x - 1/2, Y = y - 1/2",
        default_family="hybrid-square",
    )


def _smooth3d(dim: int) -> ManufacturedCase:
    return ManufacturedCase(
        name="smooth3d", dim=3, pressure=_smooth_p, gradient=_smooth_grad,
        conductivity=_smooth_K, source=_smooth_f, bounds=(0.9, 1.6),
        description="sin(pi x) sin(pi y) sin(pi z) with K = I + diag(x, y, z) / 2",
        default_family="tet-cube",
    )


def _constant(dim: int) -> ManufacturedCase:
    K = _sine2d_K if dim == 2 else _smooth_K
    return ManufacturedCase(
        name="constant", dim=dim,
        pressure=lambda x: np.ones(len(x)),
        gradient=lambda x: np.zeros((len(x), dim)),
        conductivity=K,
        source=lambda x: np.zeros(len(x)),
        bounds=(0.5, 20.0),
        description="p = 1 with variable K",
    )


def _linear(dim: int) -> ManufacturedCase:
    gradient = _LINEAR_GRADIENT[dim]
    K = _LINEAR_K[dim]
    eigenvalues = np.linalg.eigvalsh(K)
    return ManufacturedCase(
        name="linear", dim=dim,
        pressure=lambda x: 1.0 + x @ gradient,
        gradient=lambda x: np.tile(gradient, (len(x), 1)),
        conductivity=lambda x: np.broadcast_to(K, (len(x), dim, dim)).copy(),
        source=lambda x: np.zeros(len(x)),
        bounds=(float(eigenvalues.min()) * 0.99, float(eigenvalues.max()) * 1.01),
        description="globally linear p with constant anisotropic K",
    )


_CASES: Dict[str, Tuple[Tuple[int, ...], Callable[[int], ManufacturedCase]]] = {
    "paper2d": ((2,), _paper2d),
    "smooth3d": ((3,), _smooth3d),
    "constant": ((2, 3), _constant),
    "linear": ((2, 3), _linear),
}


def case_names():
    return list(_CASES)


def get_case(name: str, dim: Optional[int] = None) -> ManufacturedCase:
    """
    Look up a case, optionally for a given dimension

    Raises:
        UnknownCase: no case of that name
        CaseMismatch: case not defined in the requested dimension
    """
    if name not in _CASES:
        raise UnknownCase(f"Unknown case '{name}'; available: {', '.join(_CASES)}")
    dims, builder = _CASES[name]
    if dim is None:
        dim = dims[0]
    if dim not in dims:
        raise CaseMismatch(f"Case '{name}' is defined in {dims}D only, mesh is {dim}D")
    return builder(dim)


def check_consistency(case: ManufacturedCase, n_points: int = 100, step: float = 1e-5,
                      tol: float = 1e-6, seed: int = 0) -> float:
    """Compare f with central differences of div u at random interior points.

    Returns:
        Largest scaled deviation

    Raises:
        CaseInconsistent: deviation above ``tol``
    """
    rng = np.random.default_rng(seed)
    x = rng.uniform(0.05, 0.95, size=(n_points, case.dim))
    divergence = np.zeros(n_points)
    for k in range(case.dim):
        shift = np.zeros(case.dim)
        shift[k] = step
        divergence += (case.velocity(x + shift)[:, k] - case.velocity(x - shift)[:, k]) / (2 * step)
    f = case.source(x)
    deviation = float(np.max(np.abs(divergence - f) / np.maximum(1.0, np.abs(f))))
    if deviation > tol:
        raise CaseInconsistent(
            f"Case '{case.name}': source differs from div u by {deviation:.3e} (tolerance {tol:.1e})"
        )
    logger.debug(f"Case '{case.name}' consistent to {deviation:.2e}")
    return deviation

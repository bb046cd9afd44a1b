"""Quadrature rules on reference cells and facets.

All rules returned here are normalized: the weights sum to one, so that
``volume * sum(w * f(x))`` approximates the integral over a cell of the
given volume. Gauss rules on simplices use the collapsed (Duffy)
coordinates of the tensor Gauss-Legendre rule.
"""
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from core.cells import CellShape, ReferenceFacet, reference_cell


@dataclass(frozen=True)
class QuadratureRule:
    """Points in reference coordinates with normalized weights"""
    points: np.ndarray
    weights: np.ndarray
    exactness: str = ""

    def __post_init__(self):
        if len(self.points) != len(self.weights):
            raise ValueError("Quadrature points and weights differ in length")

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        """Normalized quadrature sum of f"""
        return float(np.dot(self.weights, f(self.points)))


@lru_cache(maxsize=None)
def gauss_interval(degree: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points on [0, 1] exact for the given degree"""
    n = degree // 2 + 1
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def _tensor(*factors: Tuple[np.ndarray, np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
    grids = np.meshgrid(*[f[0] for f in factors], indexing="ij")
    weights = np.meshgrid(*[f[1] for f in factors], indexing="ij")
    points = np.column_stack([g.ravel() for g in grids])
    return points, np.prod([w.ravel() for w in weights], axis=0)


def _collapsed_triangle(degree: int) -> Tuple[np.ndarray, np.ndarray]:
    s, ws = gauss_interval(degree + 1)
    t, wt = gauss_interval(degree)
    st, w = _tensor((s, ws), (t, wt))
    x = st[:, 0]
    y = st[:, 1] * (1.0 - st[:, 0])
    weights = 2.0 * w * (1.0 - st[:, 0])
    return np.column_stack([x, y]), weights


def _collapsed_tetrahedron(degree: int) -> Tuple[np.ndarray, np.ndarray]:
    s, ws = gauss_interval(degree + 2)
    t, wt = gauss_interval(degree + 1)
    r, wr = gauss_interval(degree)
    pts, w = _tensor((s, ws), (t, wt), (r, wr))
    s_, t_, r_ = pts.T
    x = s_
    y = t_ * (1.0 - s_)
    z = r_ * (1.0 - s_) * (1.0 - t_)
    weights = 6.0 * w * (1.0 - s_) ** 2 * (1.0 - t_)
    return np.column_stack([x, y, z]), weights


@lru_cache(maxsize=None)
def gauss_rule(shape: CellShape, degree: int) -> QuadratureRule:
    """Gauss-type rule on the reference cell exact for polynomials of the given total degree"""
    line = gauss_interval(degree)
    if shape is CellShape.QUADRILATERAL:
        points, weights = _tensor(line, line)
    elif shape is CellShape.HEXAHEDRON:
        points, weights = _tensor(line, line, line)
    elif shape is CellShape.TRIANGLE:
        points, weights = _collapsed_triangle(degree)
    elif shape is CellShape.TETRAHEDRON:
        points, weights = _collapsed_tetrahedron(degree)
    else:
        tri_points, tri_weights = _collapsed_triangle(degree)
        z, wz = line
        points = np.column_stack([
            np.repeat(tri_points, len(z), axis=0),
            np.tile(z, len(tri_points)),
        ])
        weights = np.repeat(tri_weights, len(z)) * np.tile(wz, len(tri_points))
    return QuadratureRule(points, weights, exactness=f"P{degree}")


@lru_cache(maxsize=None)
def _facet_parameters(kind: str, degree: int) -> Tuple[np.ndarray, np.ndarray]:
    if kind == "interval":
        s, w = gauss_interval(degree)
        return s[:, None], w
    if kind == "triangle":
        return _collapsed_triangle(degree)
    line = gauss_interval(degree)
    return _tensor(line, line)


def facet_rule(facet: ReferenceFacet, degree: int) -> QuadratureRule:
    """Gauss rule on a reference facet, returned in reference-cell coordinates"""
    params, weights = _facet_parameters(facet.kind, degree)
    return QuadratureRule(facet.to_cell(params), weights, exactness=f"P{degree}")


def cell_facet_rule(shape: CellShape, facet: int, degree: int) -> QuadratureRule:
    return facet_rule(reference_cell(shape).facets[facet], degree)

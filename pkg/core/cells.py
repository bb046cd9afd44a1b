"""Reference cells: vertex coordinates, facets and outward normals"""
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Tuple

import numpy as np


class CellShape(str, Enum):
    """Cell shapes, valued by their mesh-file tag"""
    TRIANGLE = "tri"
    QUADRILATERAL = "quad"
    TETRAHEDRON = "tet"
    HEXAHEDRON = "hex"
    PRISM = "prism"

    @property
    def dim(self) -> int:
        return 2 if self in (CellShape.TRIANGLE, CellShape.QUADRILATERAL) else 3

    @property
    def tag(self) -> str:
        return self.value

    @property
    def n_vertices(self) -> int:
        return len(REFERENCE_VERTICES[self])

    @property
    def domain(self) -> str:
        """Integration domain of the reference cell (see core.polynomials)"""
        if self in (CellShape.TRIANGLE, CellShape.TETRAHEDRON):
            return "simplex"
        if self is CellShape.PRISM:
            return "prism"
        return "cube"


REFERENCE_VERTICES = {
    CellShape.TRIANGLE: ((0, 0), (1, 0), (0, 1)),
    CellShape.QUADRILATERAL: ((0, 0), (1, 0), (1, 1), (0, 1)),
    CellShape.TETRAHEDRON: ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)),
    CellShape.HEXAHEDRON: (
        (0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0),
        (0, 0, 1), (1, 0, 1), (0, 1, 1), (1, 1, 1),
    ),
    CellShape.PRISM: ((0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (0, 1, 1)),
}

# Simplex facets are opposite vertex i. Quadrilateral faces are listed as
# (v0, v1, v2, v3) with v3 = v1 + v2 - v0 so that they parametrize like a
# parallelogram; edges of the quadrilateral are (start, end).
REFERENCE_FACETS = {
    CellShape.TRIANGLE: ((1, 2), (0, 2), (0, 1)),
    CellShape.QUADRILATERAL: ((0, 1), (1, 2), (2, 3), (3, 0)),
    CellShape.TETRAHEDRON: ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2)),
    CellShape.HEXAHEDRON: (
        (0, 2, 4, 6), (1, 3, 5, 7), (0, 1, 4, 5), (2, 3, 6, 7), (0, 1, 2, 3), (4, 5, 6, 7),
    ),
    CellShape.PRISM: ((0, 1, 2), (3, 4, 5), (0, 1, 3, 4), (0, 2, 3, 5), (1, 2, 4, 5)),
}

REFERENCE_VOLUMES = {
    CellShape.TRIANGLE: 0.5,
    CellShape.QUADRILATERAL: 1.0,
    CellShape.TETRAHEDRON: 1.0 / 6.0,
    CellShape.HEXAHEDRON: 1.0,
    CellShape.PRISM: 0.5,
}


def facet_kind(n_vertices: int, dim: int) -> str:
    """'interval', 'triangle' or 'parallelogram'"""
    if dim == 2:
        return "interval"
    return "triangle" if n_vertices == 3 else "parallelogram"


def facet_frame(coords: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Origin and spanning vectors (columns) of a facet given its vertex coordinates"""
    origin = coords[0]
    if len(coords) == 2:
        span = (coords[1] - origin)[:, None]
    else:
        span = np.column_stack([coords[1] - origin, coords[2] - origin])
    return origin, span


def facet_measure(span: np.ndarray, kind: str) -> float:
    if kind == "interval":
        return float(np.linalg.norm(span[:, 0]))
    area = float(np.linalg.norm(np.cross(span[:, 0], span[:, 1])))
    return 0.5 * area if kind == "triangle" else area


def facet_normal(span: np.ndarray, origin: np.ndarray, interior_point: np.ndarray) -> np.ndarray:
    """Unit normal of a facet oriented away from ``interior_point``"""
    if span.shape[1] == 1:
        t = span[:, 0]
        normal = np.array([t[1], -t[0]])
    else:
        normal = np.cross(span[:, 0], span[:, 1])
    normal = normal / np.linalg.norm(normal)
    if np.dot(normal, origin - interior_point) < 0:
        normal = -normal
    return normal


@dataclass(frozen=True)
class ReferenceFacet:
    index: int
    vertices: Tuple[int, ...]
    kind: str
    origin: np.ndarray
    span: np.ndarray
    measure: float
    normal: np.ndarray

    def to_cell(self, params: np.ndarray) -> np.ndarray:
        """Map facet parameters (n, d-1) to reference-cell coordinates (n, d)"""
        return self.origin + np.atleast_2d(params) @ self.span.T


@dataclass(frozen=True)
class ReferenceCell:
    shape: CellShape
    vertices: np.ndarray
    facets: Tuple[ReferenceFacet, ...]
    volume: float

    @property
    def dim(self) -> int:
        return self.shape.dim

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)

    def anchor_vertices(self) -> Tuple[int, ...]:
        """Vertices at the origin and at the unit points e_1, ..., e_d"""
        targets = [np.zeros(self.dim)] + [np.eye(self.dim)[k] for k in range(self.dim)]
        return tuple(int(np.flatnonzero(np.all(self.vertices == t, axis=1))[0]) for t in targets)

    def facets_of_vertex(self, vertex: int) -> Tuple[int, ...]:
        return tuple(f.index for f in self.facets if vertex in f.vertices)

    def vertex_at(self, point: np.ndarray, tol: float = 1e-14) -> int:
        """Index of the vertex located at ``point``, or -1"""
        matches = np.flatnonzero(np.all(np.abs(self.vertices - point) <= tol, axis=1))
        return int(matches[0]) if matches.size else -1

    def contains(self, points: np.ndarray, tol: float = 1e-14) -> np.ndarray:
        """Whether points lie in the closed reference cell"""
        pts = np.atleast_2d(points)
        inside = np.all(pts >= -tol, axis=1)
        if self.shape in (CellShape.TRIANGLE, CellShape.TETRAHEDRON):
            inside &= pts.sum(axis=1) <= 1 + tol
        elif self.shape is CellShape.PRISM:
            inside &= (pts[:, 0] + pts[:, 1] <= 1 + tol) & (pts[:, 2] <= 1 + tol)
        else:
            inside &= np.all(pts <= 1 + tol, axis=1)
        return inside


@lru_cache(maxsize=None)
def reference_cell(shape: CellShape) -> ReferenceCell:
    vertices = np.array(REFERENCE_VERTICES[shape], dtype=float)
    centroid = vertices.mean(axis=0)
    facets = []
    for index, local in enumerate(REFERENCE_FACETS[shape]):
        coords = vertices[list(local)]
        kind = facet_kind(len(local), shape.dim)
        origin, span = facet_frame(coords)
        facets.append(
            ReferenceFacet(
                index=index,
                vertices=tuple(local),
                kind=kind,
                origin=origin,
                span=span,
                measure=facet_measure(span, kind),
                normal=facet_normal(span, origin, centroid),
            )
        )
    return ReferenceCell(shape, vertices, tuple(facets), REFERENCE_VOLUMES[shape])

"""Hybrid conforming affine meshes.

Cells are stored with their vertices in reference order (see
``core.cells``); every cell must be the affine image
``F_T(x) = a_T + B_T x`` of its reference cell. Facets are identified by
their sorted global vertex ids. The global normal of an interior facet
points from the lower-numbered to the higher-numbered adjacent cell, and
outward on the boundary.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from core.cells import CellShape, facet_frame, facet_kind, facet_measure, reference_cell
from core.exceptions import InvalidMesh, InvertedCell, NonAffineCell, NonConforming

logger = logging.getLogger(__name__)

AFFINE_TOL = 1e-10
CONFORMITY_TOL = 1e-10


@dataclass(frozen=True)
class AffineMap:
    """x = a + B x_hat"""
    a: np.ndarray
    B: np.ndarray
    det: float
    B_inv: np.ndarray

    @classmethod
    def from_matrix(cls, a: np.ndarray, B: np.ndarray) -> "AffineMap":
        a = np.asarray(a, dtype=float)
        B = np.asarray(B, dtype=float)
        det = float(np.linalg.det(B))
        B_inv = np.linalg.inv(B) if det != 0.0 else np.full_like(B, np.nan)
        return cls(a, B, det, B_inv)

    @property
    def dim(self) -> int:
        return len(self.a)

    def __call__(self, ref_points: np.ndarray) -> np.ndarray:
        return self.a + np.atleast_2d(ref_points) @ self.B.T

    def inverse(self, points: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(points) - self.a) @ self.B_inv.T


def piola_map(affine: AffineMap, values: np.ndarray) -> np.ndarray:
    """Contravariant Piola transform (1/det) B v_hat of reference vectors (n, d) or (d,)"""
    values = np.asarray(values, dtype=float)
    return values @ affine.B.T / affine.det


@dataclass(frozen=True)
class Cell:
    shape: CellShape
    vertices: Tuple[int, ...]


@dataclass(frozen=True)
class FacetSide:
    """One adjacent cell of a facet"""
    cell: int
    local_facet: int
    sign: int
    nodes: Tuple[int, ...]


@dataclass(frozen=True)
class Facet:
    vertices: Tuple[int, ...]
    sides: Tuple[FacetSide, ...]

    @property
    def boundary(self) -> bool:
        return len(self.sides) == 1


@dataclass(frozen=True)
class FacetSignature:
    facet: int
    sides: Tuple[FacetSide, ...]


@dataclass(frozen=True)
class ShapeRegularity:
    """Statistics of ||B_T|| ||B_T^-1|| over the cells"""
    maximum: float
    minimum: float
    mean: float


class Mesh:
    """Immutable hybrid mesh with facet connectivity and affine maps"""

    def __init__(self, vertices: np.ndarray, cells: Tuple[Cell, ...], facets: Tuple[Facet, ...],
                 cell_facets: Tuple[Tuple[int, ...], ...], maps: Tuple[AffineMap, ...],
                 regularity: ShapeRegularity, diameters: np.ndarray):
        self.vertices = vertices
        self.cells = cells
        self.facets = facets
        self.cell_facets = cell_facets
        self.maps = maps
        self.regularity = regularity
        self.diameters = diameters
        self.vertices.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_cells(self) -> int:
        return len(self.cells)

    @property
    def n_facets(self) -> int:
        return len(self.facets)

    @property
    def h(self) -> float:
        """Largest cell diameter"""
        return float(self.diameters.max())

    @property
    def shapes(self) -> Tuple[CellShape, ...]:
        return tuple(sorted({c.shape for c in self.cells}, key=lambda s: s.value))

    def boundary_facets(self) -> List[int]:
        return [f for f, facet in enumerate(self.facets) if facet.boundary]

    def facet_signature(self, facet: int) -> FacetSignature:
        return FacetSignature(facet, self.facets[facet].sides)

    def facet_sign(self, cell: int, local_facet: int) -> int:
        """Orientation sign of a cell's local facet relative to the global facet normal"""
        for side in self.facets[self.cell_facets[cell][local_facet]].sides:
            if side.cell == cell:
                return side.sign
        raise KeyError(f"Cell {cell} is not adjacent to its facet {local_facet}")

    def volume(self, cell: int) -> float:
        shape = self.cells[cell].shape
        return self.maps[cell].det * reference_cell(shape).volume

    def centroid(self, cell: int) -> np.ndarray:
        shape = self.cells[cell].shape
        return self.maps[cell](reference_cell(shape).centroid[None, :])[0]

    def summary(self) -> Dict[str, object]:
        counts: Dict[str, int] = {}
        for c in self.cells:
            counts[c.shape.tag] = counts.get(c.shape.tag, 0) + 1
        return {
            "dim": self.dim,
            "vertices": self.n_vertices,
            "cells": counts,
            "facets": self.n_facets,
            "boundary_facets": len(self.boundary_facets()),
            "h": self.h,
            "shape_regularity": self.regularity.maximum,
        }


CellSpec = Union[Cell, Tuple[Union[CellShape, str], Sequence[int]]]


def _normalize_cells(cells: Sequence[CellSpec], n_vertices: int, dim: int) -> Tuple[Cell, ...]:
    result = []
    for index, spec in enumerate(cells):
        if isinstance(spec, Cell):
            shape, ids = spec.shape, spec.vertices
        else:
            shape, ids = spec
        try:
            shape = CellShape(shape)
        except ValueError:
            raise InvalidMesh(f"Cell {index} has unknown shape {shape!r}")
        ids = tuple(int(v) for v in ids)
        if shape.dim != dim:
            raise InvalidMesh(f"Cell {index} ({shape.tag}) does not match mesh dimension {dim}")
        if len(ids) != shape.n_vertices:
            raise InvalidMesh(
                f"Cell {index} ({shape.tag}) needs {shape.n_vertices} vertices, got {len(ids)}"
            )
        if len(set(ids)) != len(ids) or min(ids) < 0 or max(ids) >= n_vertices:
            raise InvalidMesh(f"Cell {index} has invalid vertex ids {ids}")
        result.append(Cell(shape, ids))
    return tuple(result)


def _affine_map(index: int, cell: Cell, coords: np.ndarray, tol: float) -> AffineMap:
    ref = reference_cell(cell.shape)
    anchors = ref.anchor_vertices()
    origin = coords[anchors[0]]
    B = np.column_stack([coords[k] - origin for k in anchors[1:]])
    affine = AffineMap.from_matrix(origin, B)
    if affine.det <= 0.0:
        raise InvertedCell(index, affine.det)
    size = float(pdist(coords).max())
    deviation = float(np.abs(affine(ref.vertices) - coords).max())
    if deviation > tol * size:
        raise NonAffineCell(index, deviation)
    return affine


def _check_hanging_nodes(vertices: np.ndarray, facets: Sequence[Facet], tol: float):
    """No mesh vertex may lie on a facet, boundary or interior, it does not belong to"""
    dim = vertices.shape[1]
    tree = cKDTree(vertices)
    for facet_index, facet in enumerate(facets):
        ids = facet.vertices
        coords = vertices[list(facet.sides[0].nodes)]
        center = coords.mean(axis=0)
        radius = float(np.linalg.norm(coords - center, axis=1).max())
        slack = tol * 2.0 * radius
        near = np.array(tree.query_ball_point(center, radius + slack), dtype=int)
        near = near[~np.isin(near, ids)]
        if near.size == 0:
            continue
        kind = facet_kind(len(ids), dim)
        origin, span = facet_frame(coords)
        params = np.linalg.lstsq(span, (vertices[near] - origin).T, rcond=None)[0].T
        residual = np.linalg.norm(vertices[near] - origin - params @ span.T, axis=1)
        inside = residual <= slack
        inside &= np.all(params >= -tol, axis=1)
        if kind == "triangle":
            inside &= params.sum(axis=1) <= 1 + tol
        else:
            inside &= np.all(params <= 1 + tol, axis=1)
        if np.any(inside):
            offender = int(near[np.flatnonzero(inside)[0]])
            where = "boundary" if facet.boundary else "interior"
            raise NonConforming(
                f"Vertex {offender} lies on {where} facet {facet_index} {ids} without being one of its vertices"
            )


def build_mesh(vertices, cells: Sequence[CellSpec], affine_tol: float = AFFINE_TOL,
               conformity_tol: float = CONFORMITY_TOL) -> Mesh:
    """Validate raw vertex/cell data and derive connectivity.

    Args:
        vertices: (n, d) coordinates, d = 2 or 3
        cells: Cell objects or (shape, vertex ids) pairs in reference order
        affine_tol: Allowed deviation from the affine image, relative to the cell size
        conformity_tol: Relative tolerance of the hanging-node test

    Returns:
        Validated mesh

    Raises:
        InvalidMesh, InvertedCell, NonAffineCell, NonConforming
    """
    vertices = np.array(vertices, dtype=float)
    if vertices.ndim != 2 or vertices.shape[1] not in (2, 3):
        raise InvalidMesh(f"Vertices must have shape (n, 2) or (n, 3), got {vertices.shape}")
    if not np.all(np.isfinite(vertices)):
        raise InvalidMesh("Vertex coordinates must be finite")
    dim = vertices.shape[1]
    cell_list = _normalize_cells(cells, len(vertices), dim)
    if not cell_list:
        raise InvalidMesh("Mesh has no cells")

    maps = []
    diameters = np.empty(len(cell_list))
    for index, cell in enumerate(cell_list):
        coords = vertices[list(cell.vertices)]
        maps.append(_affine_map(index, cell, coords, affine_tol))
        diameters[index] = pdist(coords).max()

    # facet connectivity keyed by the sorted vertex tuple
    adjacency: Dict[Tuple[int, ...], List[Tuple[int, int, Tuple[int, ...]]]] = {}
    order: List[Tuple[int, ...]] = []
    for index, cell in enumerate(cell_list):
        for facet in reference_cell(cell.shape).facets:
            nodes = tuple(cell.vertices[v] for v in facet.vertices)
            key = tuple(sorted(nodes))
            if key not in adjacency:
                adjacency[key] = []
                order.append(key)
            adjacency[key].append((index, facet.index, nodes))

    facets = []
    facet_ids: Dict[Tuple[int, ...], int] = {}
    for key in order:
        entries = sorted(adjacency[key])
        if len(entries) > 2:
            raise NonConforming(f"Facet {key} is shared by {len(entries)} cells")
        sides = tuple(
            FacetSide(cell=c, local_facet=lf, sign=1 if position == 0 else -1, nodes=nodes)
            for position, (c, lf, nodes) in enumerate(entries)
        )
        facet_ids[key] = len(facets)
        facets.append(Facet(vertices=key, sides=sides))

    cell_facets = tuple(
        tuple(
            facet_ids[tuple(sorted(cell.vertices[v] for v in facet.vertices))]
            for facet in reference_cell(cell.shape).facets
        )
        for cell in cell_list
    )

    _check_hanging_nodes(vertices, facets, conformity_tol)

    ratios = np.array([np.linalg.cond(m.B) for m in maps])
    regularity = ShapeRegularity(float(ratios.max()), float(ratios.min()), float(ratios.mean()))
    mesh = Mesh(vertices, cell_list, tuple(facets), cell_facets, tuple(maps), regularity, diameters)
    logger.debug(
        f"Built mesh: {mesh.n_cells} cells, {mesh.n_facets} facets, h={mesh.h:.4g}, "
        f"shape regularity {regularity.maximum:.4g}"
    )
    return mesh


def facet_geometry(mesh: Mesh, facet: int) -> Tuple[float, np.ndarray]:
    """Measure and global unit normal of a facet"""
    side = mesh.facets[facet].sides[0]
    coords = mesh.vertices[list(side.nodes)]
    kind = facet_kind(len(side.nodes), mesh.dim)
    origin, span = facet_frame(coords)
    ref = reference_cell(mesh.cells[side.cell].shape).facets[side.local_facet]
    # outward normal of the first side via the Piola/Nanson relation
    affine = mesh.maps[side.cell]
    normal = affine.B_inv.T @ ref.normal
    normal /= np.linalg.norm(normal)
    return facet_measure(span, kind), normal

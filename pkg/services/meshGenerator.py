"""Structured mesh generators on the unit square and the unit cube"""
import logging
from itertools import permutations
from typing import Callable, Dict, List, Tuple

import numpy as np

from core.cells import CellShape
from core.exceptions import InputError, UnknownFamily
from core.mesh import Mesh, build_mesh

CellList = List[Tuple[CellShape, Tuple[int, ...]]]


class MeshGenerator:
    """Builds the structured mesh families used by the convergence harness.

    Every family halves its mesh size per refinement level. Cells are
    emitted in reference vertex order with positive orientation.
    """

    def __init__(self):
        self.logger = logging.getLogger("services.mesh_generator")
        self._families: Dict[str, Tuple[int, Callable[[int], Mesh]]] = {
            "tri-square": (2, self._tri_square),
            "quad-square": (2, self._quad_square),
            "hybrid-square": (2, self._hybrid_square),
            "tet-cube": (3, self._tet_cube),
            "hex-cube": (3, self._hex_cube),
            "prism-cube": (3, self._prism_cube),
            "hybrid-cube": (3, self._hybrid_cube),
        }
        self.total_generated = 0

    @property
    def families(self) -> List[str]:
        return list(self._families)

    def dimension(self, family: str) -> int:
        self._check_family(family)
        return self._families[family][0]

    def generate(self, family: str, level: int) -> Mesh:
        """
        Generate a mesh of the given family and refinement level

        Args:
            family: Generator name (see ``families``)
            level: Refinement level, >= 0

        Returns:
            Validated mesh
        """
        self._check_family(family)
        if level < 0:
            raise InputError(f"Refinement level must be non-negative, got {level}")
        mesh = self._families[family][1](level)
        self.total_generated += 1
        self.logger.info(
            f"Generated {family} level {level}: {mesh.n_cells} cells, {mesh.n_vertices} vertices"
        )
        return mesh

    def _check_family(self, family: str):
        if family not in self._families:
            raise UnknownFamily(
                f"Unknown mesh family '{family}'; available: {', '.join(self._families)}"
            )

    # Grids

    @staticmethod
    def _grid(n: Tuple[int, ...]) -> Tuple[np.ndarray, Callable[..., int]]:
        axes = [np.linspace(0.0, 1.0, k + 1) for k in n]
        mesh = np.meshgrid(*axes, indexing="ij")
        vertices = np.column_stack([m.ravel() for m in mesh])
        shape = tuple(k + 1 for k in n)

        def vid(*index) -> int:
            return int(np.ravel_multi_index(index, shape))

        return vertices, vid

    @staticmethod
    def _square_triangles(vid, i: int, j: int) -> CellList:
        v00, v10, v01, v11 = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
        return [
            (CellShape.TRIANGLE, (v00, v10, v11)),
            (CellShape.TRIANGLE, (v00, v11, v01)),
        ]

    @staticmethod
    def _square_quad(vid, i: int, j: int) -> CellList:
        return [(CellShape.QUADRILATERAL, (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))]

    def _tri_square(self, level: int) -> Mesh:
        n = 2 ** level
        vertices, vid = self._grid((n, n))
        cells: CellList = []
        for i in range(n):
            for j in range(n):
                cells += self._square_triangles(vid, i, j)
        return build_mesh(vertices, cells)

    def _quad_square(self, level: int) -> Mesh:
        n = 2 ** level
        vertices, vid = self._grid((n, n))
        cells: CellList = []
        for i in range(n):
            for j in range(n):
                cells += self._square_quad(vid, i, j)
        return build_mesh(vertices, cells)

    def _hybrid_square(self, level: int) -> Mesh:
        """Triangles on x < 1/2, squares on x > 1/2"""
        n = 2 ** (level + 1)
        vertices, vid = self._grid((n, n))
        cells: CellList = []
        for i in range(n):
            for j in range(n):
                if i < n // 2:
                    cells += self._square_triangles(vid, i, j)
                else:
                    cells += self._square_quad(vid, i, j)
        return build_mesh(vertices, cells)

    @staticmethod
    def _cube_corners(vid, i: int, j: int, k: int) -> np.ndarray:
        """Global ids of the 8 cube corners in lexicographic order"""
        return np.array([
            vid(i + a, j + b, k + c) for c in (0, 1) for b in (0, 1) for a in (0, 1)
        ])

    def _cube_tetrahedra(self, vertices: np.ndarray, corners: np.ndarray) -> CellList:
        """Kuhn subdivision into 6 tetrahedra along the main diagonal"""
        cells: CellList = []
        for perm in permutations(range(3)):
            path = [0]
            offset = 0
            for axis in perm:
                offset += 2 ** axis
                path.append(offset)
            ids = [int(corners[p]) for p in path]
            coords = vertices[ids]
            if np.linalg.det((coords[1:] - coords[0]).T) < 0:
                ids[1], ids[2] = ids[2], ids[1]
            cells.append((CellShape.TETRAHEDRON, tuple(ids)))
        return cells

    @staticmethod
    def _cube_prisms(corners: np.ndarray) -> CellList:
        """Two prisms split along the (0,0)-(1,1) diagonal of the xy-square"""
        c = corners
        return [
            (CellShape.PRISM, (c[0], c[1], c[3], c[4], c[5], c[7])),
            (CellShape.PRISM, (c[0], c[3], c[2], c[4], c[7], c[6])),
        ]

    def _tet_cube(self, level: int) -> Mesh:
        n = 2 ** level
        vertices, vid = self._grid((n, n, n))
        cells: CellList = []
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    cells += self._cube_tetrahedra(vertices, self._cube_corners(vid, i, j, k))
        return build_mesh(vertices, cells)

    def _hex_cube(self, level: int) -> Mesh:
        n = 2 ** level
        vertices, vid = self._grid((n, n, n))
        cells: CellList = []
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    corners = self._cube_corners(vid, i, j, k)
                    cells.append((CellShape.HEXAHEDRON, tuple(int(v) for v in corners)))
        return build_mesh(vertices, cells)

    def _prism_cube(self, level: int) -> Mesh:
        n = 2 ** level
        vertices, vid = self._grid((n, n, n))
        cells: CellList = []
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    cells += self._cube_prisms(self._cube_corners(vid, i, j, k))
        return build_mesh(vertices, cells)

    def _hybrid_cube(self, level: int) -> Mesh:
        """Hexahedra on x < 1/2, prisms on x > 1/2"""
        n = 2 ** (level + 1)
        vertices, vid = self._grid((n, n, n))
        cells: CellList = []
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    corners = self._cube_corners(vid, i, j, k)
                    if i < n // 2:
                        cells.append((CellShape.HEXAHEDRON, tuple(int(v) for v in corners)))
                    else:
                        cells += self._cube_prisms(corners)
        return build_mesh(vertices, cells)


_generator = None


def get_mesh_generator() -> MeshGenerator:
    """Get or create the shared generator instance"""
    global _generator
    if _generator is None:
        _generator = MeshGenerator()
    return _generator


def generate(family: str, level: int) -> Mesh:
    return get_mesh_generator().generate(family, level)

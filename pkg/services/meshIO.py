"""Line-oriented text format for meshes.

    mfem-mesh 1 <dim>
    vertices <n>
    <x> <y> [<z>]          (n lines)
    cells <m>
    <tag> <v0> <v1> ...    (m lines, tags: tri quad tet hex prism)

Blank lines and everything after ``#`` are ignored.
"""
import logging
from pathlib import Path
from typing import Iterator, List, Tuple, Union

import numpy as np

from core.cells import CellShape
from core.exceptions import ParseError
from core.mesh import AFFINE_TOL, CONFORMITY_TOL, Mesh, build_mesh

logger = logging.getLogger(__name__)

MAGIC = "mfem-mesh"
VERSION = 1


def _lines(text: str) -> Iterator[Tuple[int, List[str]]]:
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if content:
            yield number, content.split()


def _expect_int(token: str, line: int, what: str) -> int:
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got '{token}'", line)
    if value < 0:
        raise ParseError(f"{what} must be non-negative, got {value}", line)
    return value


def read_mesh(text: str, affine_tol: float = AFFINE_TOL,
              conformity_tol: float = CONFORMITY_TOL) -> Mesh:
    """Parse mesh text and build (validate) the mesh"""
    lines = _lines(text)

    def next_line(what: str) -> Tuple[int, List[str]]:
        try:
            return next(lines)
        except StopIteration:
            raise ParseError(f"Unexpected end of file while reading {what}")

    number, tokens = next_line("header")
    if len(tokens) != 3 or tokens[0] != MAGIC:
        raise ParseError(f"Expected header '{MAGIC} {VERSION} <dim>'", number)
    if _expect_int(tokens[1], number, "version") != VERSION:
        raise ParseError(f"Unsupported format version {tokens[1]}", number)
    dim = _expect_int(tokens[2], number, "dimension")
    if dim not in (2, 3):
        raise ParseError(f"Dimension must be 2 or 3, got {dim}", number)

    number, tokens = next_line("vertex section")
    if len(tokens) != 2 or tokens[0] != "vertices":
        raise ParseError("Expected 'vertices <n>'", number)
    n_vertices = _expect_int(tokens[1], number, "vertex count")
    vertices = np.empty((n_vertices, dim))
    for k in range(n_vertices):
        number, tokens = next_line("vertices")
        if len(tokens) != dim:
            raise ParseError(f"Vertex needs {dim} coordinates, got {len(tokens)}", number)
        try:
            vertices[k] = [float(t) for t in tokens]
        except ValueError:
            raise ParseError(f"Invalid coordinate in '{' '.join(tokens)}'", number)

    number, tokens = next_line("cell section")
    if len(tokens) != 2 or tokens[0] != "cells":
        raise ParseError("Expected 'cells <m>'", number)
    n_cells = _expect_int(tokens[1], number, "cell count")
    cells = []
    for _ in range(n_cells):
        number, tokens = next_line("cells")
        try:
            shape = CellShape(tokens[0])
        except ValueError:
            raise ParseError(f"Unknown cell shape '{tokens[0]}'", number)
        if shape.dim != dim:
            raise ParseError(f"Cell shape '{shape.tag}' does not fit a {dim}D mesh", number)
        ids = [_expect_int(t, number, "vertex id") for t in tokens[1:]]
        if len(ids) != shape.n_vertices:
            raise ParseError(
                f"Cell '{shape.tag}' needs {shape.n_vertices} vertices, got {len(ids)}", number
            )
        if max(ids) >= n_vertices:
            raise ParseError(f"Vertex id {max(ids)} out of range", number)
        cells.append((shape, ids))

    for number, tokens in lines:
        raise ParseError(f"Unexpected content after cell section: '{' '.join(tokens)}'", number)

    return build_mesh(vertices, cells, affine_tol=affine_tol, conformity_tol=conformity_tol)


def write_mesh(mesh: Mesh) -> str:
    """Serialize a mesh; read_mesh(write_mesh(m)) reproduces vertices and cells"""
    out = [f"{MAGIC} {VERSION} {mesh.dim}", f"vertices {mesh.n_vertices}"]
    for coords in mesh.vertices:
        out.append(" ".join(repr(float(c)) for c in coords))
    out.append(f"cells {mesh.n_cells}")
    for cell in mesh.cells:
        out.append(" ".join([cell.shape.tag] + [str(v) for v in cell.vertices]))
    return "\n".join(out) + "\n"


def load_mesh(path: Union[str, Path], **tolerances: float) -> Mesh:
    path = Path(path)
    logger.info(f"Reading mesh from {path}")
    return read_mesh(path.read_text(encoding="utf-8"), **tolerances)


def save_mesh(mesh: Mesh, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(write_mesh(mesh), encoding="utf-8")
    logger.info(f"Wrote mesh with {mesh.n_cells} cells to {path}")
    return path

"""
Tests for the mesh text format
"""
import numpy as np
import pytest

from core.exceptions import NonConforming, ParseError
from services.meshIO import load_mesh, read_mesh, save_mesh, write_mesh

TWO_TRIANGLES = """\
mfem-mesh 1 2
# unit square
vertices 4
0 0
1 0
1 1
0 1   # last vertex
cells 2
tri 0 1 2
tri 0 2 3
"""


class TestReadMesh:
    """Parsing and validation"""

    def test_two_triangles(self):
        mesh = read_mesh(TWO_TRIANGLES)
        assert mesh.dim == 2
        assert mesh.n_cells == 2
        assert mesh.n_facets == 5
        assert sum(mesh.volume(c) for c in range(mesh.n_cells)) == pytest.approx(1.0)

    def test_written_mesh_is_read_back(self, two_triangles, generator):
        for mesh in (two_triangles, generator.generate("hybrid-cube", 0)):
            again = read_mesh(write_mesh(mesh))
            np.testing.assert_array_equal(again.vertices, mesh.vertices)
            assert again.cells == mesh.cells

    @pytest.mark.parametrize("text,line", [
        ("mesh 1 2\n", 1),
        ("mfem-mesh 2 2\n", 1),
        ("mfem-mesh 1 4\n", 1),
        ("mfem-mesh 1 2\nvertices 1\n0 0 0\n", 3),
        ("mfem-mesh 1 2\nvertices 1\n0 zero\n", 3),
        ("mfem-mesh 1 2\nvertices -1\n", 2),
        ("mfem-mesh 1 2\nvertices 3\n0 0\n1 0\n0 1\ncells 1\ntriangle 0 1 2\n", 7),
        ("mfem-mesh 1 2\nvertices 3\n0 0\n1 0\n0 1\ncells 1\ntri 0 1\n", 7),
        ("mfem-mesh 1 2\nvertices 3\n0 0\n1 0\n0 1\ncells 1\ntri 0 1 3\n", 7),
        ("mfem-mesh 1 2\nvertices 3\n0 0\n1 0\n0 1\ncells 1\ntet 0 1 2 2\n", 7),
        ("mfem-mesh 1 2\nvertices 3\n0 0\n1 0\n0 1\ncells 1\ntri 0 1 2\nextra\n", 8),
    ])
    def test_parse_errors_carry_line(self, text, line):
        with pytest.raises(ParseError) as info:
            read_mesh(text)
        assert info.value.line == line
        assert str(info.value).startswith(f"line {line}: ")

    def test_truncated_file(self):
        with pytest.raises(ParseError) as info:
            read_mesh("mfem-mesh 1 2\nvertices 3\n0 0\n")
        assert info.value.line is None

    def test_mesh_validation_still_applies(self):
        text = (
            "mfem-mesh 1 2\nvertices 5\n0 0\n1 0\n1 1\n0 1\n0.5 0\n"
            "cells 3\ntri 0 4 3\ntri 4 1 3\ntri 1 2 3\n"
        )
        read_mesh(text)
        hanging = (
            "mfem-mesh 1 2\nvertices 5\n0 0\n1 0\n1 1\n0 1\n0.5 0.5\n"
            "cells 3\ntri 0 1 4\ntri 1 2 4\ntri 0 2 3\n"
        )
        with pytest.raises(NonConforming):
            read_mesh(hanging)


class TestFiles:
    """Loading and saving"""

    def test_save_and_load(self, generator, tmp_path):
        mesh = generator.generate("prism-cube", 0)
        path = save_mesh(mesh, tmp_path / "nested" / "cube.mesh")
        assert path.read_text().startswith("mfem-mesh 1 3\n")
        loaded = load_mesh(path)
        assert loaded.n_cells == mesh.n_cells
        assert loaded.h == pytest.approx(mesh.h)

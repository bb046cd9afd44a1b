"""Shared fixtures for the test suite"""
import os
import sys
from pathlib import Path

import numpy as np
import pytest

# Tests always run against the testing overlay
os.environ.setdefault('MFEM_ENV', 'testing')

PROJECT_ROOT = Path(__file__).resolve().parent.parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from core.assembly import ProblemData  # noqa: E402
from core.cells import CellShape  # noqa: E402
from core.mesh import build_mesh  # noqa: E402
from services.meshGenerator import MeshGenerator  # noqa: E402

FAMILIES_2D = ["tri-square", "quad-square", "hybrid-square"]
FAMILIES_3D = ["tet-cube", "hex-cube", "prism-cube", "hybrid-cube"]
SECOND_ORDER_SHAPES = list(CellShape)
FIRST_ORDER_SHAPES = [CellShape.TRIANGLE, CellShape.QUADRILATERAL]


def identity_conductivity(points: np.ndarray) -> np.ndarray:
    d = points.shape[1]
    return np.broadcast_to(np.eye(d), (len(points), d, d)).copy()


def zero_field(points: np.ndarray) -> np.ndarray:
    return np.zeros(len(points))


def one_field(points: np.ndarray) -> np.ndarray:
    return np.ones(len(points))


@pytest.fixture(scope="session")
def generator():
    return MeshGenerator()


@pytest.fixture
def reference_triangle():
    """The unit reference triangle as a one-cell mesh"""
    return build_mesh([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [("tri", (0, 1, 2))])


@pytest.fixture
def two_triangles():
    """Unit square split along the (0,0)-(1,1) diagonal"""
    vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    return build_mesh(vertices, [("tri", (0, 1, 2)), ("tri", (0, 2, 3))])


@pytest.fixture
def reference_hexahedron():
    vertices = [
        [0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0],
        [0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1],
    ]
    return build_mesh(np.array(vertices, dtype=float), [("hex", tuple(range(8)))])


@pytest.fixture
def unit_problem():
    """K = I, f = 0, g = 0"""
    return ProblemData(identity_conductivity, zero_field, zero_field)


@pytest.fixture
def constant_pressure_problem():
    """K = I, f = 0, g = 1: exact solution p = 1, u = 0"""
    return ProblemData(identity_conductivity, zero_field, one_field)

"""Reference elements for the lumped mixed method.

Each element couples a vertex-based quadrature rule with a velocity basis
in which exactly ``d`` basis functions are nonzero at every quadrature
node, so that the lumped velocity mass matrix splits into small blocks,
one per node. Bases are explicit polynomials; metadata needed for global
assembly (node association, facet degree of freedom, trace scaling) is
derived from the polynomials when the element is built.
"""
import logging
from dataclasses import dataclass, field
from enum import IntEnum
from functools import lru_cache
from typing import Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np

from core.cells import CellShape, ReferenceCell, reference_cell
from core.exceptions import ConditioningError, IndexOutOfRange, UndefinedCombination
from core.polynomials import Polynomial, VectorField, coordinates
from core.quadrature import QuadratureRule

logger = logging.getLogger(__name__)

NODE_TOL = 1e-12
MAX_DOF_CONDITION = 1e3


class SchemeOrder(IntEnum):
    FIRST = 1
    SECOND = 2


class FacetNode(NamedTuple):
    """Normal-flux degree of freedom at a vertex of a facet"""
    facet: int
    vertex: int


class Interior(NamedTuple):
    """Degree of freedom attached to an interior quadrature node"""
    node: int


DofKind = Union[FacetNode, Interior]


@dataclass(frozen=True)
class VelocityBasis:
    functions: Tuple[VectorField, ...]
    node_of: Tuple[int, ...]
    dof_kind: Tuple[DofKind, ...]
    trace_scale: np.ndarray
    divergences: Tuple[Polynomial, ...]

    @property
    def count(self) -> int:
        return len(self.functions)

    def tabulate(self, points: np.ndarray) -> np.ndarray:
        """Values at points, shape (n_points, count, d)"""
        return np.stack([phi(points) for phi in self.functions], axis=1)

    def tabulate_divergence(self, points: np.ndarray) -> np.ndarray:
        """Divergences at points, shape (n_points, count)"""
        return np.stack([div(points) for div in self.divergences], axis=1)


@dataclass(frozen=True)
class PressureBasis:
    functions: Tuple[Polynomial, ...]
    degree: int

    @property
    def count(self) -> int:
        return len(self.functions)

    def tabulate(self, points: np.ndarray) -> np.ndarray:
        """Values at points, shape (n_points, count)"""
        return np.stack([q(points) for q in self.functions], axis=1)


@dataclass(frozen=True)
class ReferenceElementDef:
    shape: CellShape
    order: SchemeOrder
    rule: QuadratureRule
    velocity: VelocityBasis
    pressure: PressureBasis
    cell: ReferenceCell
    node_vertex: Tuple[int, ...]
    div_matrix: np.ndarray = field(repr=False)
    node_values: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.shape.dim

    @property
    def n_nodes(self) -> int:
        return len(self.rule)

    @property
    def interior_nodes(self) -> Tuple[int, ...]:
        return tuple(n for n, v in enumerate(self.node_vertex) if v < 0)

    @property
    def name(self) -> str:
        return f"{self.shape.tag}-{int(self.order)}"


# Quadrature rules

def vertex_rule(shape: CellShape) -> QuadratureRule:
    cell = reference_cell(shape)
    n = len(cell.vertices)
    exactness = "P1" if shape is CellShape.TRIANGLE else "Q1"
    return QuadratureRule(cell.vertices.copy(), np.full(n, 1.0 / n), exactness=exactness)


def lumping_rule(shape: CellShape) -> QuadratureRule:
    """Vertex-plus-interior rule of the second order scheme"""
    cell = reference_cell(shape)
    vertices = cell.vertices
    if shape is CellShape.TRIANGLE:
        points = np.vstack([vertices, [[1 / 3, 1 / 3]]])
        weights = [1 / 12] * 3 + [3 / 4]
        exactness = "P2"
    elif shape is CellShape.QUADRILATERAL:
        points = np.vstack([vertices, [[0.5, 0.5]]])
        weights = [1 / 12] * 4 + [2 / 3]
        exactness = "P3"
    elif shape is CellShape.TETRAHEDRON:
        points = np.vstack([vertices, [[0.25, 0.25, 0.25]]])
        weights = [1 / 20] * 4 + [4 / 5]
        exactness = "P2"
    elif shape is CellShape.HEXAHEDRON:
        points = np.vstack([vertices, [[0.5, 0.5, 0.5]]])
        weights = [1 / 24] * 8 + [2 / 3]
        exactness = "P3 + span{x^2yz, xy^2z, xyz^3}"
    else:
        points = np.vstack([vertices, [[1 / 3, 1 / 3, 1 / 3], [1 / 3, 1 / 3, 2 / 3]]])
        weights = [1 / 24] * 6 + [3 / 8] * 2
        exactness = "P1 + span{1, x, y, z, xz, yz}"
    return QuadratureRule(np.asarray(points, dtype=float), np.asarray(weights), exactness)


# Second order bases, transcribed polynomial by polynomial

def _triangle_rt1() -> List[VectorField]:
    x, y = coordinates(2)
    return [
        VectorField(2 * x**2 + x * y - x, y**2 + 2 * x * y - y),
        VectorField(x**2 + 2 * x * y - x, 2 * y**2 + x * y - y),
        VectorField(-x**2 + x * y + x - y, y**2 - x * y),
        VectorField(-2 * x**2 - x * y + 3 * x + y - 1, -y**2 - 2 * x * y + y),
        VectorField(-x**2 - 2 * x * y + x, -2 * y**2 - x * y + x + 3 * y - 1),
        VectorField(x**2 - x * y, -y**2 + x * y - x + y),
        VectorField(x * y, y**2 - y),
        VectorField(x**2 - x, x * y),
    ]


def _quadrilateral_bdfm2() -> List[VectorField]:
    x, y = coordinates(2)
    return [
        VectorField(2 * x**2 - 2 * x * y, 0),
        VectorField(2 * x**2 + 2 * x * y - 2 * x, 0),
        VectorField(0, 2 * y**2 + 2 * x * y - 2 * y),
        VectorField(0, 2 * y**2 - 2 * x * y),
        VectorField(-2 * x**2 + 2 * x * y + 2 * x - 2 * y, 0),
        VectorField(-2 * x**2 - 2 * x * y + 4 * x + 2 * y - 2, 0),
        VectorField(0, -2 * y**2 - 2 * x * y + 2 * x + 4 * y - 2),
        VectorField(0, -2 * y**2 + 2 * x * y - 2 * x + 2 * y),
        VectorField(x**2 - x, 0),
        VectorField(0, y**2 - y),
    ]


def _tetrahedron_rtn1() -> List[VectorField]:
    x, y, z = coordinates(3)
    p13 = VectorField(x**2 - x, x * y, x * z)
    p14 = VectorField(y * x, y**2 - y, y * z)
    p15 = VectorField(z * x, z * y, z**2 - z)
    s = x + y + z - 1
    return [
        VectorField(x, 0, 0) + 2 * p13 + p14 + p15,
        VectorField(0, y, 0) + p13 + 2 * p14 + p15,
        VectorField(0, 0, z) + p13 + p14 + 2 * p15,
        VectorField(-y, y, 0) - p13 + p14,
        VectorField(-z, 0, z) - p13 + p15,
        VectorField(s, 0, 0) - 2 * p13 - p14 - p15,
        VectorField(0, -z, z) - p14 + p15,
        VectorField(0, s, 0) - p13 - 2 * p14 - p15,
        VectorField(x, -x, 0) + p13 - p14,
        VectorField(0, 0, s) - p13 - p14 - 2 * p15,
        VectorField(x, 0, -x) + p13 - p15,
        VectorField(0, y, -y) + p14 - p15,
        p13,
        p14,
        p15,
    ]


def _hexahedron_basis() -> List[VectorField]:
    x, y, z = coordinates(3)

    def a(u, v, w):
        return u * v * w

    def b(w):
        # vanishes at w = 0, 1 and balances a(.) at the barycenter
        return 0.5 * w * (1 - w)

    def ex(p):
        return VectorField(p, 0, 0)

    def ey(p):
        return VectorField(0, p, 0)

    def ez(p):
        return VectorField(0, 0, p)

    return [
        ex(a(x, 1 - y, z) - b(x)),
        ex(a(x, y, z) - b(x)),
        ex(a(x, y, 1 - z) - b(x)),
        ex(a(x, 1 - y, 1 - z) - b(x)),
        -ex(a(1 - x, 1 - y, z) - b(x)),
        -ex(a(1 - x, y, z) - b(x)),
        -ex(a(1 - x, y, 1 - z) - b(x)),
        -ex(a(1 - x, 1 - y, 1 - z) - b(x)),
        -ey(a(1 - x, 1 - y, z) - b(y)),
        -ey(a(x, 1 - y, z) - b(y)),
        -ey(a(x, 1 - y, 1 - z) - b(y)),
        -ey(a(1 - x, 1 - y, 1 - z) - b(y)),
        ey(a(1 - x, y, z) - b(y)),
        ey(a(x, y, z) - b(y)),
        ey(a(x, y, 1 - z) - b(y)),
        ey(a(1 - x, y, 1 - z) - b(y)),
        -ez(a(1 - x, 1 - y, 1 - z) - b(z)),
        -ez(a(x, 1 - y, 1 - z) - b(z)),
        -ez(a(x, y, 1 - z) - b(z)),
        -ez(a(1 - x, y, 1 - z) - b(z)),
        ez(a(1 - x, 1 - y, z) - b(z)),
        ez(a(x, 1 - y, z) - b(z)),
        ez(a(x, y, z) - b(z)),
        ez(a(1 - x, y, z) - b(z)),
        ex(2 * b(x)),
        ey(2 * b(y)),
        ez(2 * b(z)),
    ]


def _prism_basis() -> List[VectorField]:
    x, y, z = coordinates(3)
    bubble = x * y * (1 - x - y)
    psi = [
        VectorField(x * z, 0, 0),
        VectorField(0, y * z, 0),
        VectorField(-y * z, y * z, 0),
        VectorField((x + y - 1) * z, 0, 0),
        VectorField(0, (x + y - 1) * z, 0),
        VectorField(x * z, -x * z, 0),
        VectorField(x * (1 - z), 0, 0),
        VectorField(0, y * (1 - z), 0),
        VectorField(-y * (1 - z), y * (1 - z), 0),
        VectorField((x + y - 1) * (1 - z), 0, 0),
        VectorField(0, (x + y - 1) * (1 - z), 0),
        VectorField(x * (1 - z), -x * (1 - z), 0),
        VectorField(0, 0, (1 - x - y) * z),
        VectorField(0, 0, x * z),
        VectorField(0, 0, y * z),
        VectorField(0, 0, -(1 - x - y) * (1 - z)),
        VectorField(0, 0, -x * (1 - z)),
        VectorField(0, 0, -y * (1 - z)),
    ]
    # enrichments used inside the vertex functions
    e19 = VectorField(0, 0, 4.5 * x * z**2 * (1 - z))
    e20 = VectorField(0, 0, 4.5 * x * z * (1 - z) ** 2)
    e21 = VectorField(9 * z * bubble, 0, 0)
    e22 = VectorField(9 * (1 - z) * bubble, 0, 0)
    e23 = VectorField(0, 9 * z * bubble, 0)
    e24 = VectorField(0, 9 * (1 - z) * bubble, 0)
    vertex_functions = [
        psi[0] - e21, psi[1] - e23, psi[2] + e21 - e23,
        psi[3] + e21, psi[4] + e23, psi[5] - e21 + e23,
        psi[6] - e22, psi[7] - e24, psi[8] + e22 - e24,
        psi[9] + e22, psi[10] + e24, psi[11] - e22 + e24,
        psi[12] - e19, psi[13] - e19, psi[14] - e19,
        psi[15] + e20, psi[16] + e20, psi[17] + e20,
    ]
    # interior functions, one triple per interior node: lower node z = 1/3
    # carries the factor (2 - 3z), upper node z = 2/3 the factor (3z - 1)
    lower = 2 - 3 * z
    upper = 3 * z - 1
    zbubble = 13.5 * x * z * (1 - z)
    interior = [
        VectorField(0, 0, zbubble * lower),
        VectorField(0, 0, zbubble * upper),
        VectorField(27 * bubble * lower, 0, 0),
        VectorField(27 * bubble * upper, 0, 0),
        VectorField(0, 27 * bubble * lower, 0),
        VectorField(0, 27 * bubble * upper, 0),
    ]
    return vertex_functions + interior


# First order: BDM1 built from its degrees of freedom

def _bdm1_monomials(shape: CellShape) -> List[VectorField]:
    x, y = coordinates(2)
    space = [
        VectorField(1, 0), VectorField(x, 0), VectorField(y, 0),
        VectorField(0, 1), VectorField(0, x), VectorField(0, y),
    ]
    if shape is CellShape.QUADRILATERAL:
        space += [VectorField(x**2, -2 * x * y), VectorField(2 * x * y, -y**2)]
    return space


def _bdm1_basis(shape: CellShape, max_condition: float = MAX_DOF_CONDITION) -> List[VectorField]:
    """Dual basis to the normal-flux values at both endpoints of every edge"""
    cell = reference_cell(shape)
    monomials = _bdm1_monomials(shape)
    rows = []
    for facet in cell.facets:
        for vertex in facet.vertices:
            point = cell.vertices[vertex][None, :]
            rows.append([
                float(np.dot(facet.normal, m(point)[0])) * facet.measure for m in monomials
            ])
    dof_matrix = np.array(rows)
    condition = np.linalg.cond(dof_matrix)
    if not np.isfinite(condition) or condition >= max_condition:
        raise ConditioningError(
            f"BDM1 degree-of-freedom matrix on {shape.tag} has condition {condition:.3e}"
        )
    coefficients = np.linalg.inv(dof_matrix)
    basis = []
    for i in range(len(monomials)):
        combination = monomials[0] * coefficients[0, i]
        for m in range(1, len(monomials)):
            combination = combination + monomials[m] * coefficients[m, i]
        basis.append(combination)
    return basis


# Pressure spaces

def _p1(dim: int) -> List[Polynomial]:
    return [Polynomial.constant(1.0, dim)] + list(coordinates(dim))


def _pressure_functions(shape: CellShape, order: SchemeOrder,
                        velocity: List[VectorField]) -> Tuple[List[Polynomial], int]:
    dim = shape.dim
    if order is SchemeOrder.FIRST:
        return [Polynomial.constant(1.0, dim)], 0
    if shape is CellShape.HEXAHEDRON:
        x, y, z = coordinates(3)
        return _p1(3) + [x * y, x * z, y * z], 2
    if shape is CellShape.PRISM:
        # P1 plus the divergences of the six interior enrichments
        extra = [phi.divergence() for phi in velocity[18:]]
        return _p1(3) + extra, max(p.degree for p in extra)
    return _p1(dim), 1


# Construction

def _classify(cell: ReferenceCell, rule: QuadratureRule, node_vertex: Tuple[int, ...],
              functions: List[VectorField]):
    """Node association, facet DOF and trace scaling of every basis function"""
    values = np.stack([phi(rule.points) for phi in functions], axis=1)
    node_of, dof_kind, scale = [], [], []
    for i, phi in enumerate(functions):
        nonzero = np.flatnonzero(np.linalg.norm(values[:, i, :], axis=1) > NODE_TOL)
        if len(nonzero) != 1:
            raise ValueError(
                f"{cell.shape.tag} basis function {i + 1} is nonzero at nodes {nonzero.tolist()}"
            )
        node = int(nonzero[0])
        node_of.append(node)
        vertex = node_vertex[node]
        if vertex < 0:
            dof_kind.append(Interior(node))
            scale.append(1.0)
            continue
        fluxes = [
            (f, float(np.dot(cell.facets[f].normal, values[node, i])) * cell.facets[f].measure)
            for f in cell.facets_of_vertex(vertex)
        ]
        carrying = [(f, s) for f, s in fluxes if abs(s) > NODE_TOL]
        if len(carrying) != 1:
            raise ValueError(
                f"{cell.shape.tag} basis function {i + 1} has normal flux on facets "
                f"{[f for f, _ in carrying]} at vertex {vertex}"
            )
        facet, s = carrying[0]
        dof_kind.append(FacetNode(facet, vertex))
        scale.append(s)
    return tuple(node_of), tuple(dof_kind), np.array(scale), values


_BUILDERS = {
    CellShape.TRIANGLE: _triangle_rt1,
    CellShape.QUADRILATERAL: _quadrilateral_bdfm2,
    CellShape.TETRAHEDRON: _tetrahedron_rtn1,
    CellShape.HEXAHEDRON: _hexahedron_basis,
    CellShape.PRISM: _prism_basis,
}


@lru_cache(maxsize=None)
def reference_element(shape: CellShape, order: SchemeOrder) -> ReferenceElementDef:
    """Build (once) the element definition for a shape and scheme order.

    Args:
        shape: Reference cell shape
        order: FIRST (BDM1-P0, 2D only) or SECOND

    Returns:
        Immutable element definition

    Raises:
        UndefinedCombination: first order requested on a 3D shape
    """
    shape = CellShape(shape)
    order = SchemeOrder(order)
    if order is SchemeOrder.FIRST and shape.dim == 3:
        raise UndefinedCombination(f"First order scheme is not defined on {shape.tag}")

    cell = reference_cell(shape)
    if order is SchemeOrder.FIRST:
        rule = vertex_rule(shape)
        functions = _bdm1_basis(shape)
    else:
        rule = lumping_rule(shape)
        functions = _BUILDERS[shape]()
    node_vertex = tuple(cell.vertex_at(p) for p in rule.points)

    node_of, dof_kind, scale, values = _classify(cell, rule, node_vertex, functions)
    pressure_functions, pressure_degree = _pressure_functions(shape, order, functions)
    divergences = tuple(phi.divergence() for phi in functions)
    div_matrix = np.array([
        [(div * q).integrate(shape.domain) for div in divergences] for q in pressure_functions
    ])

    element = ReferenceElementDef(
        shape=shape,
        order=order,
        rule=rule,
        velocity=VelocityBasis(tuple(functions), node_of, dof_kind, scale, divergences),
        pressure=PressureBasis(tuple(pressure_functions), pressure_degree),
        cell=cell,
        node_vertex=node_vertex,
        div_matrix=div_matrix,
        node_values=values,
    )
    logger.debug(
        f"Built element {element.name}: {element.velocity.count} velocity, "
        f"{element.pressure.count} pressure functions, {element.n_nodes} nodes"
    )
    return element


def eval_velocity(element: ReferenceElementDef, i: int, point) -> np.ndarray:
    """Value of velocity basis function ``i`` at a reference point"""
    _check_index(element, i)
    return element.velocity.functions[i](np.atleast_2d(np.asarray(point, dtype=float)))[0]


def eval_divergence(element: ReferenceElementDef, i: int, point) -> float:
    """Exact divergence of velocity basis function ``i`` at a reference point"""
    _check_index(element, i)
    return float(element.velocity.divergences[i](np.asarray(point, dtype=float)))


def _check_index(element: ReferenceElementDef, i: int):
    if not 0 <= i < element.velocity.count:
        raise IndexOutOfRange(
            f"Basis index {i} outside 0..{element.velocity.count - 1} for {element.name}"
        )


def quadrature_integral(element: ReferenceElementDef, f: Polynomial) -> float:
    """Lumping-rule approximation of the reference-cell integral of f"""
    return element.cell.volume * float(np.dot(element.rule.weights, f(element.rule.points)))


def verify_exactness(element: ReferenceElementDef, f: Polynomial,
                     degree_class: Optional[str] = None, rtol: float = 1e-12) -> bool:
    """Whether the element's rule integrates ``f`` exactly (relative tolerance ``rtol``).

    The tolerance is taken relative to the integral of |coefficients| times
    monomials, which stays meaningful when the integral itself vanishes.
    """
    approx = quadrature_integral(element, f)
    exact = f.integrate(element.shape.domain)
    scale = Polynomial(np.abs(f.coeffs)).integrate(element.shape.domain)
    exact_enough = abs(approx - exact) <= rtol * max(scale, np.finfo(float).tiny)
    if degree_class:
        logger.debug(f"{element.name} rule on {degree_class}: {approx!r} vs {exact!r}")
    return bool(exact_enough)


def node_blocks(element: ReferenceElementDef) -> Dict[int, List[int]]:
    """Basis indices associated with each quadrature node"""
    blocks: Dict[int, List[int]] = {n: [] for n in range(element.n_nodes)}
    for i, node in enumerate(element.velocity.node_of):
        blocks[node].append(i)
    return blocks


def describe(element: ReferenceElementDef) -> str:
    """Human-readable catalog entry (used by the dump-element command)"""
    lines = [
        f"element {element.name} ({element.shape.name.lower()}, order {int(element.order)})",
        f"rule: {len(element.rule)} points, exact for {element.rule.exactness}",
    ]
    for n, (point, weight) in enumerate(zip(element.rule.points, element.rule.weights)):
        coords = ", ".join(f"{c:.6g}" for c in point)
        members = ", ".join(f"Phi{i + 1}" for i in node_blocks(element)[n])
        lines.append(f"  node {n}: ({coords}) weight {weight:.6g} -> {members}")
    lines.append(f"velocity: {element.velocity.count} functions")
    for i, phi in enumerate(element.velocity.functions):
        kind = element.velocity.dof_kind[i]
        where = (
            f"facet {kind.facet} vertex {kind.vertex}" if isinstance(kind, FacetNode)
            else f"interior node {kind.node}"
        )
        comps = "; ".join(repr(c) for c in phi.components)
        lines.append(f"  Phi{i + 1} [{where}]: ({comps})")
    lines.append(
        f"pressure: {element.pressure.count} functions, degree {element.pressure.degree}"
    )
    for i, q in enumerate(element.pressure.functions):
        lines.append(f"  q{i + 1}: {q!r}")
    return "\n".join(lines)

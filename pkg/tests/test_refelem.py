"""Tests for the reference element catalog"""
import numpy as np
import pytest

from core.cells import CellShape, reference_cell
from core.exceptions import IndexOutOfRange, UndefinedCombination
from core.polynomials import Polynomial, coefficient_matrix, span_rank
from core.refelem import (
    FacetNode,
    SchemeOrder,
    describe,
    eval_divergence,
    eval_velocity,
    node_blocks,
    quadrature_integral,
    reference_element,
    verify_exactness,
)

from conftest import FIRST_ORDER_SHAPES, SECOND_ORDER_SHAPES

ALL_ELEMENTS = (
    [(shape, SchemeOrder.SECOND) for shape in SECOND_ORDER_SHAPES]
    + [(shape, SchemeOrder.FIRST) for shape in FIRST_ORDER_SHAPES]
)

COUNTS = {
    (CellShape.TRIANGLE, SchemeOrder.SECOND): (8, 3),
    (CellShape.QUADRILATERAL, SchemeOrder.SECOND): (10, 3),
    (CellShape.TETRAHEDRON, SchemeOrder.SECOND): (15, 4),
    (CellShape.HEXAHEDRON, SchemeOrder.SECOND): (27, 7),
    (CellShape.PRISM, SchemeOrder.SECOND): (24, 10),
    (CellShape.TRIANGLE, SchemeOrder.FIRST): (6, 1),
    (CellShape.QUADRILATERAL, SchemeOrder.FIRST): (8, 1),
}


def _monomials(exponent_list, dim):
    return [Polynomial.monomial(e) for e in exponent_list if len(e) == dim]


def _total_degree(dim, degree):
    return [e for e in np.ndindex(*(degree + 1,) * dim) if sum(e) <= degree]


EXACTNESS_CLASSES = {
    CellShape.TRIANGLE: _total_degree(2, 2),
    CellShape.QUADRILATERAL: _total_degree(2, 3),
    CellShape.TETRAHEDRON: _total_degree(3, 2),
    CellShape.HEXAHEDRON: _total_degree(3, 3) + [(2, 1, 1), (1, 2, 1), (1, 1, 3)],
    CellShape.PRISM: [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 0, 1), (0, 1, 1)],
}


def _facet_samples(facet, n=7, seed=0):
    rng = np.random.default_rng(seed)
    if facet.kind == "interval":
        params = rng.uniform(0.0, 1.0, (n, 1))
        hats = np.column_stack([1 - params[:, 0], params[:, 0]])
    elif facet.kind == "triangle":
        params = rng.uniform(0.0, 1.0, (n, 2))
        flip = params.sum(axis=1) > 1
        params[flip] = 1 - params[flip]
        s, t = params.T
        hats = np.column_stack([1 - s - t, s, t])
    else:
        params = rng.uniform(0.0, 1.0, (n, 2))
        s, t = params.T
        hats = np.column_stack([(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t])
    return facet.to_cell(params), hats


class TestRules:
    def test_triangle_rule(self):
        element = reference_element(CellShape.TRIANGLE, SchemeOrder.SECOND)
        np.testing.assert_allclose(
            element.rule.points, [[0, 0], [1, 0], [0, 1], [1 / 3, 1 / 3]], atol=1e-15
        )
        np.testing.assert_allclose(element.rule.weights, [1 / 12, 1 / 12, 1 / 12, 3 / 4])

    def test_hexahedron_rule(self):
        element = reference_element(CellShape.HEXAHEDRON, SchemeOrder.SECOND)
        assert len(element.rule) == 9
        np.testing.assert_allclose(element.rule.weights[:8], 1 / 24)
        assert element.rule.weights[8] == pytest.approx(2 / 3)
        assert element.velocity.count == 27

    def test_prism_rule(self):
        element = reference_element(CellShape.PRISM, SchemeOrder.SECOND)
        assert len(element.rule) == 8
        np.testing.assert_allclose(element.rule.points[6], [1 / 3, 1 / 3, 1 / 3])
        np.testing.assert_allclose(element.rule.points[7], [1 / 3, 1 / 3, 2 / 3])
        np.testing.assert_allclose(element.rule.weights, [1 / 24] * 6 + [3 / 8] * 2)
        assert element.velocity.count == 24

    @pytest.mark.parametrize("shape,order", ALL_ELEMENTS)
    def test_weights_positive_and_normalized(self, shape, order):
        rule = reference_element(shape, order).rule
        assert np.all(rule.weights > 0)
        assert rule.weights.sum() == pytest.approx(1.0, rel=1e-14)
        assert np.all(reference_cell(shape).contains(rule.points))

    @pytest.mark.parametrize("shape", SECOND_ORDER_SHAPES)
    def test_exactness_class(self, shape):
        element = reference_element(shape, SchemeOrder.SECOND)
        for f in _monomials(EXACTNESS_CLASSES[shape], shape.dim):
            assert verify_exactness(element, f), repr(f)

    @pytest.mark.parametrize("shape", SECOND_ORDER_SHAPES)
    def test_random_polynomials_in_class(self, shape):
        element = reference_element(shape, SchemeOrder.SECOND)
        monomials = _monomials(EXACTNESS_CLASSES[shape], shape.dim)
        rng = np.random.default_rng(7)
        for _ in range(200):
            weights = rng.normal(size=len(monomials))
            f = monomials[0] * weights[0]
            for m, w in zip(monomials[1:], weights[1:]):
                f = f + m * w
            assert verify_exactness(element, f, "random")

    def test_triangle_rule_values(self):
        element = reference_element(CellShape.TRIANGLE, SchemeOrder.SECOND)
        x2 = Polynomial.monomial((2, 0))
        # normalized quadrature of x^2 equals its mean value 1/6 over the cell
        assert quadrature_integral(element, x2) / element.cell.volume == pytest.approx(1 / 6)
        assert verify_exactness(element, x2)
        assert not verify_exactness(element, Polynomial.monomial((3, 0)))

    def test_quadrilateral_cubic(self):
        element = reference_element(CellShape.QUADRILATERAL, SchemeOrder.SECOND)
        assert verify_exactness(element, Polynomial.monomial((3, 0)), "P3")


class TestBases:
    @pytest.mark.parametrize("shape,order", ALL_ELEMENTS)
    def test_counts(self, shape, order):
        element = reference_element(shape, order)
        n_velocity, n_pressure = COUNTS[(shape, order)]
        assert element.velocity.count == n_velocity
        assert element.velocity.count == shape.dim * element.n_nodes
        assert element.pressure.count == n_pressure

    @pytest.mark.parametrize("shape,order", ALL_ELEMENTS)
    def test_node_association(self, shape, order):
        element = reference_element(shape, order)
        d = shape.dim
        values = element.velocity.tabulate(element.rule.points)
        for node, members in node_blocks(element).items():
            assert len(members) == d
            norms = np.linalg.norm(values[node], axis=1)
            others = np.setdiff1d(np.arange(element.velocity.count), members)
            assert np.all(norms[others] <= 1e-14)
            assert np.linalg.matrix_rank(values[node, members]) == d

    def test_triangle_blocks(self):
        element = reference_element(CellShape.TRIANGLE, SchemeOrder.SECOND)
        blocks = node_blocks(element)
        assert len(blocks) == 4
        assert sorted(blocks[3]) == [6, 7]

    def test_tetrahedron_interior_block(self):
        element = reference_element(CellShape.TETRAHEDRON, SchemeOrder.SECOND)
        assert sorted(node_blocks(element)[4]) == [12, 13, 14]

    def test_prism_interior_blocks(self):
        element = reference_element(CellShape.PRISM, SchemeOrder.SECOND)
        blocks = node_blocks(element)
        assert sorted(blocks[6]) == [18, 20, 22]
        assert sorted(blocks[7]) == [19, 21, 23]

    def test_triangle_values(self):
        element = reference_element(CellShape.TRIANGLE, SchemeOrder.SECOND)
        np.testing.assert_allclose(eval_velocity(element, 6, [1.0, 0.0]), [0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(eval_velocity(element, 0, [1 / 3, 1 / 3]), [0.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(eval_velocity(element, 7, [1 / 3, 1 / 3]), [-2 / 9, 1 / 9])

    def test_divergence_values(self):
        triangle = reference_element(CellShape.TRIANGLE, SchemeOrder.SECOND)
        assert eval_divergence(triangle, 7, [0.0, 0.0]) == pytest.approx(-1.0)
        assert eval_divergence(triangle, 7, [0.5, 0.2]) == pytest.approx(0.5)
        quad = reference_element(CellShape.QUADRILATERAL, SchemeOrder.SECOND)
        assert eval_divergence(quad, 8, [0.5, 0.5]) == pytest.approx(0.0, abs=1e-15)

    @pytest.mark.parametrize("shape,order", ALL_ELEMENTS)
    def test_divergence_matches_finite_differences(self, shape, order):
        element = reference_element(shape, order)
        rng = np.random.default_rng(3)
        step = 1e-5
        points = rng.uniform(0.05, 0.3, (10, shape.dim))
        for point in points:
            for i in range(element.velocity.count):
                fd = 0.0
                for axis in range(shape.dim):
                    e = np.zeros(shape.dim)
                    e[axis] = step
                    fd += (eval_velocity(element, i, point + e)[axis]
                           - eval_velocity(element, i, point - e)[axis]) / (2 * step)
                assert fd == pytest.approx(eval_divergence(element, i, point), abs=1e-6)

    @pytest.mark.parametrize("shape,order", ALL_ELEMENTS)
    def test_divergence_spans_pressure_space(self, shape, order):
        element = reference_element(shape, order)
        pressures = list(element.pressure.functions)
        divergences = list(element.velocity.divergences)
        assert span_rank(pressures) == element.pressure.count
        assert span_rank(divergences) == element.pressure.count
        assert span_rank(pressures + divergences) == element.pressure.count

    @pytest.mark.parametrize("shape", SECOND_ORDER_SHAPES)
    def test_pressure_contains_constants(self, shape):
        element = reference_element(shape, SchemeOrder.SECOND)
        one = Polynomial.constant(1.0, shape.dim)
        rank = span_rank(list(element.pressure.functions))
        assert span_rank(list(element.pressure.functions) + [one]) == rank

    @pytest.mark.parametrize("shape,order", ALL_ELEMENTS)
    def test_normal_traces(self, shape, order):
        """Each function carries flux through at most one facet, as a nodal interpolant"""
        element = reference_element(shape, order)
        cell = element.cell
        corner_values = element.velocity.tabulate(cell.vertices)
        for facet in cell.facets:
            points, hats = _facet_samples(facet)
            traces = element.velocity.tabulate(points) @ facet.normal
            for i, kind in enumerate(element.velocity.dof_kind):
                if isinstance(kind, FacetNode) and kind.facet == facet.index:
                    local = facet.vertices.index(kind.vertex)
                    expected = (corner_values[kind.vertex, i] @ facet.normal) * hats[:, local]
                else:
                    expected = np.zeros(len(points))
                np.testing.assert_allclose(traces[:, i], expected, atol=1e-12)

    @pytest.mark.parametrize("shape,order", ALL_ELEMENTS)
    def test_trace_scale_matches_vertex_flux(self, shape, order):
        element = reference_element(shape, order)
        cell = element.cell
        corner_values = element.velocity.tabulate(cell.vertices)
        for i, kind in enumerate(element.velocity.dof_kind):
            if isinstance(kind, FacetNode):
                facet = cell.facets[kind.facet]
                flux = corner_values[kind.vertex, i] @ facet.normal * facet.measure
                assert element.velocity.trace_scale[i] == pytest.approx(flux)


class TestErrors:
    @pytest.mark.parametrize("shape", [CellShape.TETRAHEDRON, CellShape.HEXAHEDRON, CellShape.PRISM])
    def test_first_order_undefined_in_3d(self, shape):
        with pytest.raises(UndefinedCombination):
            reference_element(shape, SchemeOrder.FIRST)

    def test_index_out_of_range(self):
        element = reference_element(CellShape.TRIANGLE, SchemeOrder.SECOND)
        with pytest.raises(IndexOutOfRange):
            eval_velocity(element, 8, [0.2, 0.2])
        with pytest.raises(IndexError):
            eval_divergence(element, -1, [0.2, 0.2])


def test_describe_lists_functions():
    text = describe(reference_element(CellShape.PRISM, SchemeOrder.SECOND))
    assert text.startswith("element prism-2")
    assert "Phi24" in text
    assert "q10" in text


def test_coefficient_matrix_shape():
    element = reference_element(CellShape.TRIANGLE, SchemeOrder.SECOND)
    matrix = coefficient_matrix(list(element.pressure.functions))
    assert matrix.shape[0] == 3

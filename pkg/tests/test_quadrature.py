"""Tests for Gauss rules on reference cells and facets"""
import numpy as np
import pytest

from core.cells import CellShape, reference_cell
from core.polynomials import Polynomial
from core.quadrature import cell_facet_rule, gauss_interval, gauss_rule


def _monomials(dim, degree):
    for exponents in np.ndindex(*(degree + 1,) * dim):
        if sum(exponents) <= degree:
            yield exponents


@pytest.mark.parametrize("degree", [1, 4, 7])
def test_interval_rule(degree):
    points, weights = gauss_interval(degree)
    assert weights.sum() == pytest.approx(1.0)
    for k in range(degree + 1):
        assert np.dot(weights, points**k) == pytest.approx(1.0 / (k + 1), rel=1e-13)


@pytest.mark.parametrize("shape", list(CellShape))
@pytest.mark.parametrize("degree", [2, 6])
def test_gauss_rule_exact_up_to_degree(shape, degree):
    rule = gauss_rule(shape, degree)
    cell = reference_cell(shape)
    assert rule.weights.sum() == pytest.approx(1.0, rel=1e-13)
    assert np.all(rule.weights > 0)
    assert np.all(cell.contains(rule.points, tol=1e-12))
    for exponents in _monomials(shape.dim, degree):
        f = Polynomial.monomial(exponents)
        approx = cell.volume * rule.apply(f)
        assert approx == pytest.approx(f.integrate(shape.domain), rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("shape", list(CellShape))
def test_facet_rules_lie_on_facets(shape):
    cell = reference_cell(shape)
    for facet in cell.facets:
        rule = cell_facet_rule(shape, facet.index, 5)
        assert rule.weights.sum() == pytest.approx(1.0, rel=1e-13)
        origin = cell.vertices[facet.vertices[0]]
        offsets = (rule.points - origin) @ facet.normal
        np.testing.assert_allclose(offsets, 0.0, atol=1e-14)


def test_facet_rule_integrates_edge_length():
    # hypotenuse of the reference triangle: integral of x along it is |F| / 2
    cell = reference_cell(CellShape.TRIANGLE)
    facet = cell.facets[0]
    rule = cell_facet_rule(CellShape.TRIANGLE, 0, 3)
    integral = facet.measure * np.dot(rule.weights, rule.points[:, 0])
    assert facet.measure == pytest.approx(np.sqrt(2.0))
    assert integral == pytest.approx(np.sqrt(2.0) / 2)

"""Tests for dense polynomials and vector fields"""
import numpy as np
import pytest

from core.polynomials import Polynomial, VectorField, coordinates, monomial_integrals, span_rank


class TestPolynomial:
    def test_arithmetic_and_evaluation(self):
        x, y = coordinates(2)
        p = (x + 1) * (y - 2)
        assert p(np.array([1.0, 1.0])) == pytest.approx(-2.0)
        np.testing.assert_allclose(p(np.array([[0.0, 0.0], [2.0, 3.0]])), [-2.0, 3.0])

    def test_degree(self):
        x, y, z = coordinates(3)
        assert (x * y * z**2 + x).degree == 4
        assert Polynomial.constant(0.0, 2).degree == -1
        assert Polynomial.constant(3.0, 2).degree == 0

    def test_diff(self):
        x, y = coordinates(2)
        p = x**2 * y
        assert p.diff(0)(np.array([2.0, 3.0])) == pytest.approx(12.0)
        assert p.diff(1)(np.array([2.0, 3.0])) == pytest.approx(4.0)
        assert Polynomial.constant(5.0, 2).diff(0).is_zero()

    @pytest.mark.parametrize("exponents,domain,expected", [
        ((1, 1), "simplex", 1 / 24),
        ((2, 0), "simplex", 1 / 12),
        ((2, 1), "cube", 1 / 6),
        ((1, 0, 1), "prism", 1 / 12),
        ((0, 0, 0), "simplex", 1 / 6),
        ((1, 1, 1), "cube", 1 / 8),
    ])
    def test_exact_integrals(self, exponents, domain, expected):
        assert Polynomial.monomial(exponents).integrate(domain) == pytest.approx(expected, rel=1e-14)

    def test_unknown_domain(self):
        with pytest.raises(ValueError):
            monomial_integrals((2, 2), "sphere")

    def test_invalid_coefficients(self):
        with pytest.raises(ValueError):
            Polynomial([1.0, 2.0])

    def test_dimension_mismatch(self):
        x2 = coordinates(2)[0]
        x3 = coordinates(3)[0]
        with pytest.raises(ValueError):
            x2 + x3

    def test_repr_lists_terms(self):
        x, y = coordinates(2)
        text = repr(2 * x * y - 1)
        assert "x*y" in text
        assert "-1" in text


class TestVectorField:
    def test_divergence(self):
        x, y = coordinates(2)
        field = VectorField(x**2, x * y)
        div = field.divergence()
        assert div(np.array([0.5, 0.7])) == pytest.approx(1.5)

    def test_constant_components(self):
        x, y, z = coordinates(3)
        field = VectorField(0, y, 1)
        np.testing.assert_allclose(field(np.array([[0.1, 0.2, 0.3]])), [[0.0, 0.2, 1.0]])
        assert field.divergence()(np.array([0.1, 0.2, 0.3])) == pytest.approx(1.0)

    def test_dot(self):
        x, y = coordinates(2)
        field = VectorField(x, 2 * y)
        assert field.dot([1.0, -1.0])(np.array([3.0, 1.0])) == pytest.approx(1.0)

    def test_component_count_checked(self):
        x, y = coordinates(2)
        with pytest.raises(ValueError):
            VectorField(x, y, 1)
        with pytest.raises(ValueError):
            VectorField(x, coordinates(3)[1])

    def test_all_scalar_components(self):
        field = VectorField(1, 0)
        assert field.dim == 2
        np.testing.assert_allclose(field(np.array([[0.3, 0.4], [1.0, 2.0]])), [[1.0, 0.0], [1.0, 0.0]])
        assert field.divergence()(np.array([0.3, 0.4])) == pytest.approx(0.0)
        assert VectorField(0, 0, 2).dim == 3
        with pytest.raises(ValueError):
            VectorField(1, 2, 3, 4)
        with pytest.raises(ValueError):
            VectorField(1)


def test_span_rank():
    x, y = coordinates(2)
    one = Polynomial.constant(1.0, 2)
    assert span_rank([one, x, one + x]) == 2
    assert span_rank([one, x, y, x * y]) == 4

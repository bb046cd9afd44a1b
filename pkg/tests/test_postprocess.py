"""
Tests for projections, local post-processing, error norms and observed orders
"""
from types import SimpleNamespace

import numpy as np
import pytest

from conftest import identity_conductivity, one_field
from core.assembly import build_dofmap
from core.exceptions import DegenerateSequence
from core.fields import pressure_values
from core.postprocess import (
    ErrorReport,
    convergence_rates,
    eoc,
    error_norms,
    l2_norm,
    local_exponents,
    observed_orders,
    project_pressure,
    stenberg_postprocess,
)
from core.quadrature import gauss_rule
from core.refelem import SchemeOrder


def zeros(points):
    return np.zeros(len(points))


def report(h, err_u, err_p=0.1):
    return ErrorReport(h=h, dof_u=1, dof_p=1, err_u=err_u, err_div=0.1, err_p=err_p, err_proj0=0.1)


class TestProjection:
    """Cellwise L2 projections"""

    def test_monomial_order(self):
        assert local_exponents(2, 1) == [(0, 0), (1, 0), (0, 1)]
        assert len(local_exponents(2, 2)) == 6
        assert len(local_exponents(3, 2)) == 10

    def test_constant_is_reproduced(self, generator):
        mesh = generator.generate("hybrid-square", 0)
        projected = project_pressure(mesh, 1, one_field)
        np.testing.assert_allclose(projected.coeffs[:, 0], 1.0)
        np.testing.assert_allclose(projected.coeffs[:, 1:], 0.0, atol=1e-13)

    def test_x_onto_constants_on_reference_triangle(self, reference_triangle):
        projected = project_pressure(reference_triangle, 0, lambda x: x[:, 0])
        assert projected(0, np.array([[0.2, 0.7]]))[0] == pytest.approx(1.0 / 3.0)

    def test_residual_is_orthogonal(self, reference_triangle):
        projected = project_pressure(reference_triangle, 1, lambda x: x[:, 0] ** 2)
        rule = gauss_rule(reference_triangle.cells[0].shape, 6)
        residual = rule.points[:, 0] ** 2 - projected(0, rule.points)
        for test in (np.ones(len(rule)), rule.points[:, 0], rule.points[:, 1]):
            assert float(np.dot(rule.weights, residual * test)) == pytest.approx(0.0, abs=1e-14)


class TestStenbergPostprocess:
    """Local pressure reconstruction"""

    def test_constant_pressure_without_flux(self, reference_triangle):
        dofmap = build_dofmap(reference_triangle, SchemeOrder.SECOND)
        u = np.zeros(dofmap.n_velocity)
        p = np.zeros(dofmap.n_pressure)
        p[dofmap.pressure_dofs[(0, 0)]] = 2.5
        post = stenberg_postprocess(reference_triangle, dofmap, identity_conductivity, u, p)
        points = np.array([[0.1, 0.1], [0.5, 0.2], [0.0, 1.0]])
        np.testing.assert_allclose(post(0, points), 2.5, atol=1e-13)

    @pytest.mark.parametrize("family,degree", [
        ("hybrid-square", 2), ("hybrid-square", 1), ("hybrid-cube", 2),
    ])
    def test_cell_means_match(self, generator, family, degree):
        mesh = generator.generate(family, 0)
        dofmap = build_dofmap(mesh, SchemeOrder.SECOND)
        rng = np.random.default_rng(5)
        u = rng.standard_normal(dofmap.n_velocity)
        p = rng.standard_normal(dofmap.n_pressure)
        post = stenberg_postprocess(mesh, dofmap, identity_conductivity, u, p, degree=degree)
        for group in dofmap.groups.values():
            rule = gauss_rule(group.shape, 6)
            points = group.physical_points(rule.points)
            discrete = pressure_values(group, p, rule.points) @ rule.weights
            reconstructed = post.values(group.cells, points) @ rule.weights
            np.testing.assert_allclose(reconstructed, discrete, atol=1e-12)


class TestErrorNorms:
    """Relative L2 errors"""

    def test_unit_error_for_zero_pressure(self, reference_triangle):
        dofmap = build_dofmap(reference_triangle, SchemeOrder.SECOND)
        exact = SimpleNamespace(
            pressure=lambda x: x[:, 0],
            velocity=lambda x: np.zeros_like(x),
            source=zeros,
        )
        result = error_norms(reference_triangle, dofmap, exact,
                             np.zeros(dofmap.n_velocity), np.zeros(dofmap.n_pressure))
        assert result.err_p == pytest.approx(1.0)
        # (mean of x)^2 |T| against int x^2 = 1/12
        assert result.err_proj0 == pytest.approx(np.sqrt(2.0 / 3.0))
        assert result.err_u == 0.0
        assert result.err_post is None
        assert result.dof_u == 8 and result.dof_p == 3

    def test_scaling_invariance(self, generator):
        mesh = generator.generate("quad-square", 1)
        dofmap = build_dofmap(mesh, SchemeOrder.SECOND)
        rng = np.random.default_rng(9)
        u = rng.standard_normal(dofmap.n_velocity)
        p = rng.standard_normal(dofmap.n_pressure)

        def exact(scale):
            return SimpleNamespace(
                pressure=lambda x: scale * np.sin(x[:, 0]),
                velocity=lambda x: scale * np.column_stack([x[:, 1], -x[:, 0]]),
                source=lambda x: scale * np.ones(len(x)),
            )

        once = error_norms(mesh, dofmap, exact(1.0), u, p)
        twice = error_norms(mesh, dofmap, exact(2.0), 2.0 * u, 2.0 * p)
        for name in ("err_u", "err_div", "err_p", "err_proj0"):
            assert getattr(twice, name) == pytest.approx(getattr(once, name), rel=1e-12)

    def test_l2_norm(self, generator):
        mesh = generator.generate("hybrid-square", 0)
        assert l2_norm(mesh, one_field) == pytest.approx(1.0)
        assert l2_norm(mesh, lambda x: x[:, 0]) == pytest.approx(np.sqrt(1.0 / 3.0))
        # vector fields use the pointwise Euclidean norm
        assert l2_norm(mesh, lambda x: np.tile([3.0, 4.0], (len(x), 1))) == pytest.approx(5.0)


class TestConvergenceRates:
    """Observed orders between refinements"""

    def test_exact_log_ratio(self):
        assert convergence_rates([0.5, 0.25], [0.4, 0.1]) == [pytest.approx(2.0)]

    def test_first_order_table_values(self):
        rates = convergence_rates([2.0**-3, 2.0**-4], [0.092531, 0.046019])
        assert rates[0] == pytest.approx(1.00, abs=0.01)

    def test_second_order_table_values(self):
        rates = convergence_rates([2.0**-3, 2.0**-4], [0.000391, 0.000049])
        assert rates[0] == pytest.approx(2.99, abs=0.01)

    @pytest.mark.parametrize("h,errors", [
        ([0.5], [0.1]),
        ([0.25, 0.5], [0.4, 0.1]),
        ([0.5, 0.25], [0.4, 0.0]),
        ([0.5, 0.25], [0.4]),
    ])
    def test_degenerate_sequences(self, h, errors):
        with pytest.raises(DegenerateSequence):
            convergence_rates(h, errors)

    def test_eoc_over_reports(self):
        reports = [report(0.5, 0.4), report(0.25, 0.1), report(0.125, 0.025)]
        assert eoc(reports) == [pytest.approx(2.0), pytest.approx(2.0)]
        assert eoc(reports, "err_p") == [pytest.approx(0.0), pytest.approx(0.0)]

    def test_observed_orders_mark_missing_values(self):
        reports = [report(0.5, 0.4), report(0.25, 0.1)]
        orders = observed_orders(reports, ["err_u", "err_post"])
        assert orders["err_u"] == [None, pytest.approx(2.0)]
        assert orders["err_post"] == [None, None]

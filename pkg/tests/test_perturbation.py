import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qubit_rings.bethe import solve_density
from qubit_rings.model import DomainError, curve_point_from_delta
from qubit_rings.perturbation import (
    SeriesError,
    SeriesSurface,
    contour_data,
    dE_deps_fixed_y,
    de0_db,
    dp_coefficient,
    dy0_db,
    e0_closed,
    e1_closed,
    energy_kernel_coefficient,
    energy_series,
    fixed_y_sign_change,
    fixed_y_slope_closed,
    kernel_series,
    last_term_dominates,
    ow_optimum,
    recursion_step,
    series_quadrature_order,
    sqrt_one_minus_coeffs,
    theta_coefficient,
    y0_closed,
    y1_closed,
)
from qubit_rings.quadrature import gauss_legendre

B_GRID = np.linspace(0.1, 3.0, 20)


def sigma(b):
    return math.sin(b) / (b + math.pi)


def taylor_from_fit(f, k_max, radius=0.2, degree=23):
    """Taylor coefficients at eps = 0 of a function known only for eps != 0.

    Fits a Chebyshev polynomial on [-radius, radius] through an even number
    of nodes (none at 0) in extended precision.
    """
    with mpmath.workdps(50):
        poly, _ = mpmath.chebyfit(f, [-radius, radius], degree + 1, error=True)
        return [float(c) for c in poly[::-1][: k_max + 1]]


def dp_lambda_form(alpha):
    # sinh(lam) / (cosh(lam) - cos a) with cosh(lam) = 1/eps, evaluated literally
    def f(eps):
        lam = mpmath.acosh(1 / eps)
        return mpmath.re(mpmath.sinh(lam) / (mpmath.cosh(lam) - mpmath.cos(alpha)))

    return f


def dtheta_lambda_form(diff):
    def f(eps):
        lam = mpmath.acosh(1 / eps)
        return mpmath.re(mpmath.sinh(2 * lam) / (mpmath.cosh(2 * lam) - mpmath.cos(diff)))

    return f


def test_sqrt_coefficients():
    c = sqrt_one_minus_coeffs(6)
    assert c[:4] == (1.0, -0.5, -0.125, -0.0625)
    x = 0.3
    assert sum(cm * x**m for m, cm in enumerate(sqrt_one_minus_coeffs(40))) == pytest.approx(
        math.sqrt(1 - x), abs=1e-15
    )


def test_low_order_kernels():
    a = np.linspace(-3, 3, 7)
    np.testing.assert_array_equal(dp_coefficient(0, a), np.ones_like(a))
    np.testing.assert_allclose(dp_coefficient(1, a), np.cos(a), atol=1e-15)
    np.testing.assert_array_equal(theta_coefficient(0, a, 0.4), np.ones_like(a))
    np.testing.assert_array_equal(theta_coefficient(3, a, 0.4), np.zeros_like(a))
    rule = gauss_legendre(8, -1, 1)
    dp1, th2 = kernel_series(1, 1.0, rule)
    np.testing.assert_allclose(dp1.values, np.cos(rule.nodes), atol=1e-15)
    with pytest.raises(DomainError):
        kernel_series(-1, 1.0, rule)


@pytest.mark.parametrize("alpha", [0.0, 0.7, 2.0, 3.1])
def test_dp_coefficients_against_lambda_form(alpha):
    want = taylor_from_fit(dp_lambda_form(alpha), 4)
    got = [float(dp_coefficient(k, alpha)) for k in range(5)]
    np.testing.assert_allclose(got, want, atol=1e-7)


@pytest.mark.parametrize("diff", [0.0, 0.9, 2.5])
def test_theta_coefficients_against_lambda_form(diff):
    want = taylor_from_fit(dtheta_lambda_form(diff), 4)
    got = [float(theta_coefficient(k, diff, 0.0)) for k in range(5)]
    np.testing.assert_allclose(got, want, atol=1e-7)


@given(st.floats(-3.2, 3.2), st.floats(-0.5, 0.5))
def test_energy_kernel_series(alpha, eps):
    total = sum(energy_kernel_coefficient(n, alpha) * eps**n for n in range(80))
    assert total == pytest.approx((1 - eps**2) / (1 - eps * math.cos(alpha)), abs=1e-12)


@given(st.floats(-3.2, 3.2), st.floats(-0.4, 0.4))
def test_dp_series_sums_to_kernel(alpha, eps):
    total = sum(dp_coefficient(k, alpha) * eps**k for k in range(60))
    assert total == pytest.approx(math.sqrt(1 - eps**2) / (1 - eps * math.cos(alpha)), abs=1e-12)


@pytest.mark.parametrize("b", B_GRID)
def test_low_order_densities(b):
    s = energy_series(b, 2)
    x = s.rule.nodes
    sg = sigma(b)
    np.testing.assert_allclose(s.R_coeffs[0].values, 1 / (1 + b / math.pi), atol=1e-14)
    np.testing.assert_allclose(s.R_coeffs[1].values, np.cos(x) - sg, atol=1e-10)
    r2 = np.cos(x) ** 2 - sg / 2 * np.cos(x) - 0.5 * sg * (math.cos(b) - sg) - 0.5
    np.testing.assert_allclose(s.R_coeffs[2].values, r2, atol=1e-10)


@pytest.mark.parametrize("b", B_GRID)
def test_scalar_anchors(b):
    s = energy_series(b, 2)
    sg = sigma(b)
    assert s.y_coeffs[0] == pytest.approx(y0_closed(b), abs=1e-10)
    assert s.y_coeffs[1] == pytest.approx(y1_closed(b), abs=1e-10)
    assert s.y_coeffs[2] == pytest.approx(-sg * (math.cos(b) - sg), abs=1e-10)
    assert s.f_minus_one == pytest.approx(-0.25 + y0_closed(b) / 2, abs=1e-10)
    assert s.f_coeffs[1] == pytest.approx(y1_closed(b), abs=1e-10)
    assert s.e_coeffs[0] == pytest.approx(e0_closed(b), abs=1e-10)
    assert s.e_coeffs[0] == pytest.approx(y1_closed(b), abs=1e-10)
    assert s.e_coeffs[1] == pytest.approx(e1_closed(b), abs=1e-10)


def test_energy_examples():
    assert e0_closed(1.351802) == pytest.approx(-0.434467, abs=1e-6)
    assert e1_closed(0.0) == 0.5
    assert e0_closed(math.pi / 2) == pytest.approx(-4 / (3 * math.pi), abs=1e-15)
    s = energy_series(0.0, 3)
    assert s.e_coeffs[1] == pytest.approx(0.5, abs=1e-15)
    assert s.y_coeffs == [1.0, 0.0, 0.0, 0.0]


@pytest.mark.parametrize("b", [0.2, 1.0, 2.0, math.pi])
def test_high_orders_are_alpha_independent_and_cancel(b):
    s = energy_series(b, 14)
    assert len(s.R_coeffs) == len(s.y_coeffs) == len(s.e_coeffs) == 15
    assert len(s.f_coeffs) == 16
    assert abs(s.e_inverse_eps) <= 1e-10
    for r in s.R_coeffs:
        np.testing.assert_allclose(r.values, r.values[::-1], atol=1e-10)


def test_alpha_dependent_y_is_rejected(monkeypatch):
    import qubit_rings.perturbation as pert

    s = pert._new_series(1.0, 3, None)
    monkeypatch.setattr(pert, "invert_order_k", lambda q, rule, b: 1.1 * q)
    with pytest.raises(SeriesError):
        recursion_step(s, 1)


def test_inconsistent_inversion_is_rejected(monkeypatch):
    import qubit_rings.perturbation as pert

    s = pert._new_series(1.0, 3, None)
    monkeypatch.setattr(pert, "invert_order_k", lambda q, rule, b: q - 0.01)
    with pytest.raises(SeriesError, match="differ"):
        recursion_step(s, 1)


def test_recursion_order_is_enforced():
    import qubit_rings.perturbation as pert

    s = pert._new_series(1.0, 3, None)
    with pytest.raises(DomainError):
        recursion_step(s, 2)


def test_quadrature_order_is_converged():
    for b in (1.0, math.pi):
        a = energy_series(b, 14)
        c = energy_series(b, 14, quad_order=120)
        np.testing.assert_allclose(a.y_coeffs, c.y_coeffs, atol=1e-13)
        np.testing.assert_allclose(a.e_coeffs, c.e_coeffs, atol=1e-13)
    assert series_quadrature_order(14) >= 2 * 14 + 4


@pytest.mark.parametrize("b", [0.5, 1.0, 1.351802, 2.0])
def test_series_against_nystrom(b):
    s = energy_series(b, 14)
    sol = solve_density(curve_point_from_delta(-20.0), b)
    assert abs(sol.y - s.y_at(0.05)) < 1e-8
    assert abs(sol.f - s.f_at(0.05)) < 1e-8
    assert abs(sol.e_gs - s.e_at(0.05)) < 1e-8


@pytest.mark.parametrize("b", [0.5, 1.0, 1.351802, 2.0])
def test_series_error_scales_with_high_power(b):
    s = energy_series(b, 14)

    def gap(eps):
        sol = solve_density(curve_point_from_delta(-1 / eps), b, 60)
        return max(abs(sol.y - s.y_at(eps)), abs(sol.e_gs - s.e_at(eps)))

    assert gap(0.4) / gap(0.2) >= 2**10


def test_fixed_y_derivative_examples():
    assert dE_deps_fixed_y(0.0) == pytest.approx(0.5, abs=1e-14)
    assert abs(dE_deps_fixed_y(math.pi / 2)) < 1e-12
    assert dE_deps_fixed_y(3 * math.pi / 4) < 0
    assert fixed_y_slope_closed(3 * math.pi / 4) < 0


@given(st.floats(0.01, math.pi - 0.01))
def test_fixed_y_derivative_matches_closed_form(b):
    assert dE_deps_fixed_y(b) == pytest.approx(fixed_y_slope_closed(b), abs=1e-10)


def test_fixed_y_derivative_against_finite_differences():
    # dE/deps at fixed y by differencing the series along the y = y0(b) line
    b, h = 1.1, 1e-5
    y_target = y0_closed(b)
    surface = SeriesSurface(4)
    e_plus = surface.energy_fixed_y(y_target, h)[0]
    assert (e_plus - e0_closed(b)) / h == pytest.approx(dE_deps_fixed_y(b), abs=1e-4)
    assert de0_db(b) == pytest.approx((e0_closed(b + h) - e0_closed(b - h)) / (2 * h), abs=1e-8)
    assert dy0_db(b) == pytest.approx((y0_closed(b + h) - y0_closed(b - h)) / (2 * h), abs=1e-8)


def test_sign_change_location():
    assert abs(fixed_y_sign_change() - math.pi / 2) < 1e-9
    assert y0_closed(math.pi / 2) == pytest.approx(1 / 3, abs=1e-16)


def test_ow_optimum():
    c, b, y = ow_optimum()
    assert abs(c - 0.434467) < 1e-6
    assert (b + math.pi) * math.cos(b) == pytest.approx(math.sin(b), abs=1e-14)
    assert y == pytest.approx(y0_closed(b))


def test_contour_data():
    rows = contour_data([0.5, 1.0], [0.0, 0.5, 0.95], 14)
    assert [(r.b, r.epsilon) for r in rows][:3] == [(0.5, 0.0), (0.5, 0.5), (0.5, 0.95)]
    assert rows[0].y == pytest.approx(y0_closed(0.5))
    assert rows[0].trusted
    with pytest.raises(DomainError):
        contour_data([1.0], [1.5])


def test_divergence_flag():
    for b in (0.0, 1.0, math.pi):
        assert not energy_series(b, 14).untrusted(0.95)
    s = energy_series(1.0, 3)
    s.e_coeffs[-1] = 1e3
    assert s.untrusted(0.5) and not s.untrusted(0.01)
    assert last_term_dominates([1.0, 0.0, 2.0], 0.8)
    assert not last_term_dominates([1.0, 0.0, 2.0], 0.5)
    assert not last_term_dominates([0.0, 1.0, 2.0], 0.4)
    assert not last_term_dominates([0.0, 0.0], 0.9)


@pytest.fixture(scope="module")
def surface():
    return SeriesSurface(14)


def test_surface_matches_direct_series(surface):
    for b in (0.3, 1.7, 2.9):
        s = energy_series(b, 14)
        y, e, _ = surface.evaluate(b, 0.4)
        assert y == pytest.approx(s.y_at(0.4), abs=1e-12)
        assert e == pytest.approx(s.e_at(0.4), abs=1e-12)


def test_surface_edge_minimum(surface):
    b = surface.b_for_y(0.398316, 0.0)
    e, _, _ = surface.energy_fixed_y(0.398316, 0.0)
    assert e == pytest.approx(-0.434467, abs=1e-6)
    assert b == pytest.approx(1.3518, abs=1e-4)


@pytest.mark.parametrize("y", [0.9, 0.6, 0.4, 0.35])
def test_eps_star_zero_above_one_third(surface, y):
    assert surface.optimal_epsilon(y, np.linspace(0, 0.95, 20)).epsilon == 0.0


@pytest.mark.parametrize("y", [0.32, 0.3, 0.2, 0.1])
def test_eps_star_positive_below_one_third(surface, y):
    assert surface.optimal_epsilon(y, np.linspace(0, 0.95, 20)).epsilon > 0.0


def test_domain_errors():
    with pytest.raises(DomainError):
        energy_series(-0.1)
    with pytest.raises(DomainError):
        energy_series(1.0, 21)
    with pytest.raises(DomainError):
        dE_deps_fixed_y(4.0)

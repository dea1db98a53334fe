import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qubit_rings.model import (
    DomainError,
    b_from_y0,
    curve_point_from_delta,
    curve_point_from_s,
    field_lower_bound,
    h_matrix,
    h_matrix_pauli,
    optimal_field,
    ow_asymptotic_limit,
    ow_concurrence,
)

s_values = st.floats(1e-6, 1.0, exclude_min=False)


def test_curve_point_at_s_one():
    p = curve_point_from_s(1.0)
    assert (p.delta, p.field, p.lam, p.epsilon) == (-1.0, 0.0, 0.0, 1.0)


def test_curve_point_at_s_half():
    p = curve_point_from_s(0.5)
    assert p.delta == -1.25 and p.field == 0.75
    assert abs(p.lam - math.log(2)) < 1e-15
    assert abs(p.delta**2 - p.field**2 - 1.0) < 1e-15


@pytest.mark.parametrize("s", [0.0, -0.1, 1.5])
def test_curve_point_rejects_other_branch(s):
    with pytest.raises(DomainError):
        curve_point_from_s(s)


def test_curve_point_from_delta_examples():
    assert abs(curve_point_from_delta(-1.25).s - 0.5) < 1e-15
    p = curve_point_from_delta(-1.0)
    assert p.s == 1.0 and p.field == 0.0
    assert abs(curve_point_from_delta(-10.0).field - math.sqrt(99)) < 1e-13
    with pytest.raises(DomainError):
        curve_point_from_delta(-0.5)


def test_round_trip_random_s():
    rng = np.random.default_rng(0)
    for s in rng.uniform(0.0, 1.0, 10_000):
        s = float(s) or 0.5
        p = curve_point_from_s(s)
        q = curve_point_from_delta(p.delta)
        assert abs(q.s - s) <= 1e-12
        assert abs(p.delta**2 - p.field**2 - 1.0) <= 1e-12 * p.delta**2
        assert abs(q.delta**2 - q.field**2 - 1.0) <= 1e-12 * q.delta**2


def test_round_trip_within_conditioning():
    # one rounding of delta moves s by eps |delta| / |d delta / ds|
    rng = np.random.default_rng(0)
    for s in rng.uniform(0.0, 1.0, 10_000):
        s = float(s) or 0.5
        p = curve_point_from_s(s)
        slope = 0.5 * abs(1.0 - 1.0 / s**2)
        allowed = 1e-12 + 4 * np.finfo(float).eps * abs(p.delta) / slope
        assert abs(curve_point_from_delta(p.delta).s - s) <= allowed


@given(s_values)
def test_curve_invariants(s):
    p = curve_point_from_s(s)
    assert abs(p.lam + math.log(s)) < 1e-15 * max(1, abs(math.log(s)))
    assert abs(p.epsilon * abs(p.delta) - 1.0) < 1e-15
    assert p.field >= 0


def test_h_matrix_examples():
    np.testing.assert_array_equal(
        h_matrix(1.0), [[1, 0, 0, 0], [0, 0, -1, 0], [0, -1, 0, 0], [0, 0, 0, 1]]
    )
    assert np.diag(h_matrix(2.0)).tolist() == [2.0, 0.0, 0.0, 0.5]
    with pytest.raises(DomainError):
        h_matrix(0.0)


@given(st.floats(1e-3, 1e3))
def test_h_matrix_forms_agree(s):
    h = h_matrix(s)
    np.testing.assert_allclose(h, h_matrix_pauli(s), atol=1e-14 * max(s, 1 / s))
    np.testing.assert_array_equal(h, h.T)
    swap = np.eye(4)[[0, 2, 1, 3]]
    np.testing.assert_array_equal(swap @ h @ swap, h)
    np.testing.assert_allclose(
        np.sort(np.linalg.eigvalsh(h)), np.sort([s, 1 / s, 1.0, -1.0]), atol=1e-12 * max(s, 1 / s)
    )


def test_ow_concurrence_examples():
    assert abs(ow_concurrence(4, 1) - 0.5) < 1e-15
    assert ow_concurrence(4, 2) == 0.0
    assert abs(ow_concurrence(6, 2) - 2 / (6 * math.sin(math.pi / 4))) < 1e-15
    assert abs(ow_concurrence(6, 2) - 0.471405) < 1e-6


@pytest.mark.parametrize("n,p", [(4, 3), (1, 0), (3, 2), (2, 1)])
def test_ow_concurrence_domain(n, p):
    with pytest.raises(DomainError):
        ow_concurrence(n, p)


@given(st.integers(2, 40).flatmap(lambda n: st.tuples(st.just(2 * n), st.just(n))))
def test_ow_concurrence_half_filling_is_zero(np_pair):
    n, p = np_pair
    assert ow_concurrence(n, p) == 0.0


def test_ow_concurrence_approaches_asymptote():
    for frac in (0.1, 0.25, 0.3):
        gaps = []
        for n in (1000, 10_000, 100_000):
            p = round(frac * n)
            gaps.append(abs(ow_concurrence(n, p) - ow_asymptotic_limit(1 - 2 * p / n)))
        assert gaps[0] > gaps[1] > gaps[2]


def test_asymptotic_limit_examples():
    assert ow_asymptotic_limit(1.0) == 0.0
    assert b_from_y0(1.0) == 0.0
    assert abs(ow_asymptotic_limit(0.398316) - 0.434467) < 1e-6
    assert abs(b_from_y0(1 / 3) - math.pi / 2) < 1e-15
    assert abs(ow_asymptotic_limit(1 / 3) - 4 / (3 * math.pi)) < 1e-15


def test_optimal_field_examples():
    assert optimal_field(0.0, 0.3) == 0.0
    assert abs(optimal_field(0.2, 0.05) - 0.2 / (2 * math.sqrt(0.05) * math.sqrt(0.25))) < 1e-15
    assert abs(optimal_field(0.2, 0.05) - 0.894427) < 1e-6
    assert abs(optimal_field(1.0, 1.0) - 1 / (2 * math.sqrt(2))) < 1e-15
    assert optimal_field(0.5, 0.0) == math.inf


def test_field_lower_bound_examples():
    assert field_lower_bound(0.0) == 0.0
    assert abs(field_lower_bound(1.0) - 1 / (2 * math.sqrt(2))) < 1e-15
    assert abs(field_lower_bound(1 / 3) - 0.204124) < 1e-6


@given(st.floats(0, 1), st.floats(1e-9, 1))
def test_field_bound_holds(y, frac):
    p = frac * (y + 1) / 2
    assert field_lower_bound(y) <= optimal_field(y, p) * (1 + 1e-12)

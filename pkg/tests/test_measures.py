import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import normal_cdf_oracle

from equilab import CylinderEvent, GaussianSchedule, ShiftVector, ValidationError
from equilab.generators import sample_gaussian_prefix
from equilab.measures import (
    INV_SQRT_2PI,
    borel_cantelli_sum,
    gaussian_mass,
    geometric_envelope,
    interval_mass,
    last_hits,
    limsup_hit_estimate,
    normal_cdf,
    normal_quantile,
    normal_sf,
    shift_monotonicity_check,
)
from equilab import rng

UNIT = (-0.5, 0.5)


# --- kernel


@pytest.mark.parametrize("sigma", [1e-3, 1.0, 2.0, 1e30])
def test_cdf_at_zero(sigma):
    assert normal_cdf(0.0, sigma) == 0.5


def test_cdf_half():
    # series oracle value, frozen
    assert normal_cdf_oracle(0.5, 1.0) == pytest.approx(0.691462461274013, abs=1e-15)
    assert normal_cdf(0.5, 1.0) == pytest.approx(normal_cdf_oracle(0.5, 1.0), abs=1e-15)


@pytest.mark.parametrize("sigma", [0.3, 1.0, 7.0])
def test_cdf_symmetry_sweep(sigma):
    x = np.linspace(-8 * sigma, 8 * sigma, 2001)
    assert np.max(np.abs(normal_cdf(x, sigma) + normal_cdf(-x, sigma) - 1)) <= 1e-12


def test_cdf_against_oracle_spot():
    for x in (-7.5, -3.0, -0.1, 0.0, 1.3, 4.2, 6.9):
        assert abs(normal_cdf(x, 1.0) - normal_cdf_oracle(x, 1.0)) <= 1e-12


def test_sf_complements_cdf():
    x = np.linspace(-6, 6, 101)
    assert np.allclose(normal_sf(x) + normal_cdf(x), 1.0, atol=1e-15)
    # the tail side keeps relative accuracy where 1 - cdf would not
    assert normal_sf(10.0) == pytest.approx(7.619853024160527e-24, rel=1e-12)


@pytest.mark.parametrize("sigma", [0.0, -1.0, float("inf"), float("nan")])
def test_bad_sigma(sigma):
    with pytest.raises(ValidationError):
        normal_cdf(0.0, sigma)


def test_bad_x():
    with pytest.raises(ValidationError):
        normal_cdf(float("nan"))


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
def test_quantile_domain(p):
    with pytest.raises(ValidationError):
        normal_quantile(p)


@pytest.mark.parametrize("sigma", [0.5, 1.0, 3.0])
def test_quantile_round_trip_lower_and_center(sigma):
    # the upper tail beyond ~5.3 sigma is covered (and limited by double precision) in the acceptance suite
    x = np.linspace(-6 * sigma, 5 * sigma, 5001)
    assert np.max(np.abs(normal_quantile(normal_cdf(x, sigma), sigma) - x)) <= 1e-9 * max(1.0, sigma)


# --- schedule


def test_schedule_values():
    s = GaussianSchedule(1.0, 10)
    assert s.sigma(1) == 2.0
    assert s.sigma(10) == 1024.0
    assert s.sigma(50) == 1024.0  # saturates
    assert s.sigmas(12).tolist() == [2.0**k for k in range(1, 11)] + [1024.0, 1024.0]


def test_schedule_exceeds_sigma_floor():
    s = GaussianSchedule(INV_SQRT_2PI * 1.0000001, 1000)
    n = np.arange(1, 1001)
    assert np.all(np.diff(s.sigmas(1000)) > 0)
    assert np.all(s.sigmas(1000) > np.ldexp(INV_SQRT_2PI, n))


@pytest.mark.parametrize("c,n_max,field", [
    (INV_SQRT_2PI, 10, "c"), (0.1, 10, "c"), (1.0, 0, "n_max"), (1.0, 1001, "n_max"), (1.0, 2.5, "n_max"),
    (1e300, 1000, "c"),
])
def test_schedule_validation(c, n_max, field):
    with pytest.raises(ValidationError) as e:
        GaussianSchedule(c, n_max)
    assert e.value.field == field


def test_schedule_dict():
    s = GaussianSchedule(1.25, 64)
    assert s.to_dict() == {"c": 1.25, "n_max": 64}
    assert GaussianSchedule.from_dict(s.to_dict()) == s


# --- masses


def test_degenerate_interval_has_zero_mass():
    assert gaussian_mass(CylinderEvent(3, 0.2, 0.2), GaussianSchedule()) == 0.0


def test_mass_n1_c1():
    m = gaussian_mass(CylinderEvent(1, -0.5, 0.5), GaussianSchedule(1.0))
    assert m <= 0.5
    assert m == pytest.approx(2 * normal_cdf_oracle(0.25) - 1, abs=1e-14)
    assert m == pytest.approx(0.1974126513658474, abs=1e-14)


def test_mass_at_boundary_scale():
    # sigma_1 = 2/sqrt(2 pi): the smallest first-coordinate scale the bound allows
    sigma = 2 * INV_SQRT_2PI
    m = interval_mass(-0.5, 0.5, sigma)
    assert m == pytest.approx(2 * normal_cdf_oracle(0.5 / sigma) - 1, abs=1e-14)
    assert m == pytest.approx(0.4692, abs=1e-4)
    assert m <= 0.5


def test_mass_index_out_of_range():
    with pytest.raises(ValidationError):
        gaussian_mass(CylinderEvent(11), GaussianSchedule(1.0, 10))


def test_event_validation():
    with pytest.raises(ValidationError):
        CylinderEvent(0)
    with pytest.raises(ValidationError):
        CylinderEvent(1, 0.5, -0.5)
    with pytest.raises(ValidationError):
        CylinderEvent(1, -math.inf, 0.5)


def test_monotonicity_h0():
    a, b = shift_monotonicity_check(CylinderEvent(4, -0.5, 0.5, 0.0), GaussianSchedule())
    assert a == b


@pytest.mark.parametrize("n", [1, 5, 20])
def test_monotonicity_far_shift(n):
    s = GaussianSchedule()
    a, b = shift_monotonicity_check(CylinderEvent(n, -0.5, 0.5, 10 * s.sigma(n)), s)
    assert a < 1e-6 * b


def test_monotonicity_sweep():
    s = GaussianSchedule(1.0, 200)
    for n in range(1, 201):
        for h in np.linspace(-3 * s.sigma(n), 3 * s.sigma(n), 41).tolist() + [-1e3, -5.0, 0.0, 5.0, 1e3]:
            a, b = shift_monotonicity_check(CylinderEvent(n, -0.5, 0.5, h), s)
            assert a <= b + 1e-14


@given(st.integers(1, 60), st.floats(-1e3, 1e3), st.floats(1.0, 50.0))
def test_mass_below_geometric_bound_for_any_shift(n, h, c):
    s = GaussianSchedule(c, 60)
    assert gaussian_mass(CylinderEvent(n, -0.5, 0.5, h), s) <= 2.0**-n + 1e-15


# --- Borel-Cantelli partial sums


def test_envelope():
    assert geometric_envelope(1, 10) == 1023 / 1024
    assert geometric_envelope(5, 5) == 1 / 32
    assert geometric_envelope(3, 2) == 0.0


def test_sum_below_one():
    s = GaussianSchedule(1.0, 200)
    total = borel_cantelli_sum(s, ShiftVector.constant(0), UNIT, 1, 50)
    assert total < 1
    assert total <= geometric_envelope(1, 50)


@pytest.mark.parametrize("k", [1, 7, 60, 199])
def test_single_term_sum(k):
    s = GaussianSchedule(1.0, 200)
    shift = ShiftVector.linear(0.3)
    assert borel_cantelli_sum(s, shift, UNIT, k, k) == gaussian_mass(CylinderEvent(k, -0.5, 0.5, shift.at(k)), s)


def test_sum_monotone_and_bounded():
    s = GaussianSchedule(1.0, 200)
    partial = [borel_cantelli_sum(s, ShiftVector.constant(0), UNIT, 1, n) for n in range(1, 201)]
    assert all(b >= a for a, b in zip(partial, partial[1:]))
    assert partial[-1] <= 1.0


@given(st.floats(-1e3, 1e3), st.integers(1, 30), st.integers(0, 30))
def test_sum_under_envelope_for_any_shift(h, n_from, extra):
    s = GaussianSchedule(1.0, 200)
    n_to = n_from + extra
    assert borel_cantelli_sum(s, ShiftVector.constant(h), UNIT, n_from, n_to) <= geometric_envelope(n_from, n_to) + 1e-15


@pytest.mark.parametrize("n_from,n_to", [(0, 3), (5, 3), (1, 201)])
def test_sum_range_validation(n_from, n_to):
    with pytest.raises(ValidationError):
        borel_cantelli_sum(GaussianSchedule(1.0, 200), ShiftVector.constant(0), UNIT, n_from, n_to)


# --- limsup hits


def test_limsup_empty_range():
    assert limsup_hit_estimate(GaussianSchedule(), ShiftVector.constant(0), UNIT, 6, 5, 10, 0).fraction == 0.0


def test_limsup_nonfinite_interval():
    with pytest.raises(ValidationError):
        limsup_hit_estimate(GaussianSchedule(), ShiftVector.constant(0), (-math.inf, 0.5), 1, 5, 10, 0)


def test_limsup_tail_window():
    s = GaussianSchedule(1.0, 200)
    est = limsup_hit_estimate(s, ShiftVector.constant(0), UNIT, 5, 50, 10_000, 123)
    assert est.union_bound <= 1 / 16
    assert est.fraction <= est.union_bound + 3 * math.sqrt(est.union_bound / 10_000)


def test_limsup_independent_of_workers():
    s = GaussianSchedule(1.0, 200)
    a = last_hits(s, ShiftVector.constant(0), UNIT, 30, 500, 5, workers=1)
    b = last_hits(s, ShiftVector.constant(0), UNIT, 30, 500, 5, workers=4)
    assert np.array_equal(a, b)


def test_last_hits_match_direct_sampling():
    s = GaussianSchedule(1.0, 200)
    hits = last_hits(s, ShiftVector.constant(0), UNIT, 20, 50, 9)
    for r in range(50):
        x = sample_gaussian_prefix(s, 20, rng.derive_seed(9, rng.REPLICA, r)).values
        inside = np.flatnonzero(np.abs(x) <= 0.5)
        assert hits[r] == (inside[-1] + 1 if inside.size else 0)


@pytest.mark.parametrize("n", [2])
def test_sampler_agrees_with_mass(n):
    s = GaussianSchedule(1.0, 10)
    m = 100_000
    hits = last_hits(s, ShiftVector.constant(0.7), UNIT, n, m, 2024)
    # with n_to = n the last hit equals n iff coordinate n hit
    freq = np.mean(hits == n)
    p = gaussian_mass(CylinderEvent(n, -0.5, 0.5, 0.7), s)
    assert abs(freq - p) <= 4 * math.sqrt(p * (1 - p) / m)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import brute_force_star_discrepancy

from equilab import GeneratorSpec, TestFunction, ValidationError
from equilab.equidist import (
    CONSISTENT,
    INCONSISTENT,
    DEFAULT_BANK_IDS,
    EquidistReport,
    bank_function,
    center_shift,
    default_bank,
    default_threshold,
    fractional_parts,
    index_set_density,
    interval_ratio,
    star_discrepancy,
    ud_verdict,
    weyl_average,
)
from equilab.generators import generate

unit = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)
unit_prefixes = st.lists(unit, min_size=1, max_size=200)
reals = st.floats(-1e3, 1e3, allow_nan=False)


# --- mod-1 transforms


@pytest.mark.parametrize("x,expected", [
    ([2.0], [0.0]),
    ([-0.25], [0.75]),
    ([1.5, -1.5, 0.5], [0.5, 0.5, 0.5]),
])
def test_fractional_parts(x, expected):
    assert fractional_parts(x).tolist() == expected


def test_fractional_parts_tiny_negative_stays_below_one():
    (v,) = fractional_parts([-1e-20]).tolist()
    assert 0 <= v < 1


@given(st.lists(reals, min_size=1, max_size=50))
def test_fractional_parts_idempotent(x):
    once = fractional_parts(x)
    assert fractional_parts(once) == once
    assert np.all((once.values >= 0) & (once.values < 1))


@pytest.mark.parametrize("x,expected", [([0.75], [0.25]), ([0.0], [-0.5])])
def test_center_shift(x, expected):
    assert center_shift(x).tolist() == expected


# --- interval ratios


def test_interval_ratio_direct_count():
    r = interval_ratio([0.1, 0.2, 0.3], 0, 0.25, 0, 1)
    assert (r.count, r.n) == (2, 3)
    assert r.empirical == pytest.approx(2 / 3)
    assert r.target == 0.25


def test_interval_ratio_target_on_centered_interval():
    assert interval_ratio([0.0], 0, 0.25, -0.5, 0.5).target == 0.25


@pytest.mark.parametrize("n", [2, 10, 1000])
def test_interval_ratio_centered_grid_half(n, centered_grid):
    assert interval_ratio(centered_grid(n), 0, 0.5).empirical == 0.5


def test_interval_ratio_closed_endpoints():
    assert interval_ratio([0.25, 0.5], 0.25, 0.5).count == 2


@pytest.mark.parametrize("c,d,a,b", [(0.5, 0.5, 0, 1), (-0.1, 0.5, 0, 1), (0.2, 1.1, 0, 1), (0.6, 0.5, 0, 1)])
def test_interval_ratio_preconditions(c, d, a, b):
    with pytest.raises(ValidationError):
        interval_ratio([0.3], c, d, a, b)


def test_interval_ratio_empty_prefix():
    with pytest.raises(ValidationError):
        interval_ratio([], 0, 0.5)


# --- star discrepancy


def test_star_discrepancy_single_point():
    assert star_discrepancy([0.5]) == 0.5


def test_star_discrepancy_centered_grid_two():
    assert star_discrepancy([0.25, 0.75]) == 0.25


def test_star_discrepancy_van_der_corput_4():
    # brute-force oracle value, frozen
    x = generate(GeneratorSpec.van_der_corput(2), 4)
    assert brute_force_star_discrepancy(x) == 0.25
    assert star_discrepancy(x) == 0.25


def test_star_discrepancy_rejects_out_of_range():
    with pytest.raises(ValidationError, match="fractional_parts"):
        star_discrepancy([0.2, 1.0])
    with pytest.raises(ValidationError):
        star_discrepancy([-0.1])


@settings(max_examples=300)
@given(unit_prefixes)
def test_star_discrepancy_matches_brute_force(x):
    assert star_discrepancy(x) == pytest.approx(brute_force_star_discrepancy(x), abs=1e-12)


@given(unit_prefixes)
def test_star_discrepancy_bounds(x):
    d = star_discrepancy(x)
    assert 1 / (2 * len(x)) <= d <= 1


@given(unit_prefixes, st.randoms(use_true_random=False))
def test_star_discrepancy_permutation_invariant(x, rnd):
    y = list(x)
    rnd.shuffle(y)
    assert star_discrepancy(y) == star_discrepancy(x)


# --- Weyl averages


def test_weyl_constant_function():
    avg, res = weyl_average([0.3, 17.2, -4.9], TestFunction.monomial(0))
    assert (avg, res) == (1.0, 0.0)


@pytest.mark.parametrize("n", [2, 8, 1024])
def test_weyl_identity_on_centered_grid(n, centered_grid):
    avg, res = weyl_average(centered_grid(n), TestFunction.monomial(1))
    assert avg == 0.5
    assert res == 0.0


def test_weyl_kronecker_sqrt2_square():
    x = generate(GeneratorSpec.kronecker(math.sqrt(2)), 100_000)
    avg, res = weyl_average(x, TestFunction.monomial(2))
    assert res < 0.01
    assert abs(avg - 1 / 3) == res


def test_weyl_uses_fractional_parts():
    f = TestFunction.monomial(2)
    assert weyl_average([0.25, 3.5], f) == weyl_average([0.25, 0.5], f)


@given(st.lists(reals, min_size=1, max_size=60), st.randoms(use_true_random=False),
       st.sampled_from(DEFAULT_BANK_IDS))
def test_weyl_permutation_invariant(x, rnd, fid):
    y = list(x)
    rnd.shuffle(y)
    f = bank_function(fid)
    assert weyl_average(y, f) == weyl_average(x, f)


def test_exact_integrals():
    assert TestFunction.monomial(3).exact_integral == 0.25
    assert TestFunction.trig_cos(2).exact_integral == 0.0
    assert TestFunction.trig_sin(1).exact_integral == 0.0
    tent = TestFunction.piecewise_linear([(0, 0), (0.5, 1), (1, 0)])
    assert tent.exact_integral == pytest.approx(0.5, abs=1e-15)


def test_default_bank():
    bank = default_bank()
    assert len(bank) == 11
    assert [f.id for f in bank] == list(DEFAULT_BANK_IDS)


@pytest.mark.parametrize("fid", ["mono", "tan1", "cos0", "sin-1"])
def test_unknown_function_id(fid):
    with pytest.raises(ValidationError):
        bank_function(fid)


@pytest.mark.parametrize("knots", [[(0, 0), (0.5, 1)], [(0.1, 0), (1, 1)], [(0, 0), (0.6, 1), (0.5, 0), (1, 0)]])
def test_bad_knots(knots):
    with pytest.raises(ValidationError):
        TestFunction.piecewise_linear(knots)


@settings(max_examples=100)
@given(unit_prefixes, st.floats(0.05, 0.8), st.floats(0.01, 0.19))
def test_weyl_ratio_consistency(x, t, w):
    # ramp from 1 on [0, t] down to 0 at t + w; its average can only exceed the
    # [0, t] ratio by the mass in (t, t + w], which is at most w + 2 D*_N
    f = TestFunction.piecewise_linear([(0, 1), (t, 1), (t + w, 0), (1, 0)])
    _, residual = weyl_average(x, f)
    dev = interval_ratio(x, 0, t).deviation
    assert abs(residual - dev) <= w + 2 * star_discrepancy(x) + 1e-12


# --- index-set density


def test_density_all_inside():
    assert index_set_density([0.1, -0.2, 0.5], (-0.5, 0.5)).final_estimate == 0.0


def test_density_all_outside():
    assert index_set_density([3.0, -2.0, 0.51], (-0.5, 0.5)).final_estimate == 1.0


def test_density_perfect_squares():
    k = np.arange(1, 10_001)
    x = np.where(np.isclose(np.sqrt(k), np.round(np.sqrt(k))), k, 0).astype(float)
    est = index_set_density(x, (-0.5, 0.5))
    assert est.final_estimate == 0.01
    assert est.counts[-1] == 100
    assert est.density_at(100) == 0.1


@given(st.lists(reals, min_size=1, max_size=100))
def test_density_invariants(x):
    est = index_set_density(x, (-0.5, 0.5))
    c = est.counts
    assert np.all(np.diff(c) >= 0)
    assert np.all(c <= np.arange(1, len(x) + 1))
    assert np.all((est.densities >= 0) & (est.densities <= 1))


def test_density_bad_interval():
    with pytest.raises(ValidationError):
        index_set_density([0.0], (0.5, 0.5))


# --- verdicts


def test_default_threshold():
    assert default_threshold(1) == 0.5
    assert default_threshold(10**4) == pytest.approx(0.03)
    assert default_threshold(10**12) == pytest.approx(0.010002)


def test_verdict_van_der_corput_consistent():
    x = generate(GeneratorSpec.van_der_corput(2), 2**14)
    d = brute_force_star_discrepancy(x.values[:2000])  # oracle on a slice stays cheap
    assert d < 0.01
    rep = ud_verdict(x, 0, 1, 10, 0.01)
    assert rep.verdict == CONSISTENT
    assert rep.star_discrepancy < 1e-3


@pytest.mark.parametrize("n", [2, 10, 500])
def test_verdict_constant_sequence(n):
    rep = ud_verdict([0.3] * n, 0, 1, 10, 0.5)
    assert rep.verdict == INCONSISTENT
    assert rep.star_discrepancy >= 0.7 - 1 / (2 * n)


@pytest.mark.parametrize("thr", [0.1, 0.49, 0.5])
def test_verdict_single_point(thr):
    assert ud_verdict([0.5], 0, 1, 2, thr).verdict == INCONSISTENT


def test_verdict_outside_points_force_inconsistent():
    x = list(np.linspace(0, 1, 100, endpoint=False)) + [5.0] * 10
    rep = ud_verdict(x, 0, 1, 10, 0.05)
    assert rep.outside_fraction == pytest.approx(10 / 110)
    assert rep.star_discrepancy >= rep.outside_fraction
    assert rep.verdict == INCONSISTENT


def test_verdict_preconditions():
    for kw in ({"a": 1, "b": 0}, {"grid": 1}, {"threshold": 0}):
        with pytest.raises(ValidationError):
            ud_verdict([0.5], **{"a": 0, "b": 1, "grid": 4, "threshold": 0.1, **kw})


@settings(max_examples=200)
@given(st.lists(reals, min_size=1, max_size=200), st.integers(2, 20), st.floats(0.005, 0.6))
def test_verdict_equality_mod1_vs_centered(x, grid, thr):
    a = ud_verdict(fractional_parts(x), 0.0, 1.0, grid, thr)
    b = ud_verdict(center_shift(x), -0.5, 0.5, grid, thr)
    assert a.verdict == b.verdict


def test_report_serialization():
    rep = ud_verdict([0.5, 0.25, 0.75], 0, 1, 4, 0.5, bank=["mono1"])
    d = rep.to_dict()
    assert list(d) == ["n", "star_discrepancy", "ratio_table", "weyl_residuals", "verdict", "threshold"]
    assert d["star_discrepancy"] == 0.25
    assert len(d["ratio_table"]) == 4
    assert d["weyl_residuals"] == {"mono1": 0.0}
    rows = list(rep.csv_rows())
    assert len(rows) == 5
    assert rows[-1][0] == "summary"
    assert len(EquidistReport.CSV_HEADER) == len(rows[0])


@given(st.lists(reals, min_size=1, max_size=100), st.integers(2, 12))
def test_report_invariants(x, grid):
    rep = ud_verdict(x, -2.0, 3.0, grid)
    assert 1 / (2 * rep.n) <= rep.star_discrepancy <= 1
    for r in rep.ratio_table:
        assert r.a <= r.c < r.d <= r.b
        assert r.empirical == r.count / r.n
        assert r.target == pytest.approx((r.d - r.c) / (r.b - r.a))

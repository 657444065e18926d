import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from volalab.data_ingest import ReturnSeries
from volalab.descriptives import (
    betainc,
    normal_two_sided,
    paired_t_test,
    significance_stars,
    student_t_cdf,
    student_t_two_sided,
    weekday_summary,
    welch_t_test,
)
from volalab.errors import DegenerateSample, NoObservations

from conftest import business_days
from oracles import paired_t_brute, t_two_sided_quad, welch_brute


def test_all_zero_diffs():
    res = paired_t_test([0.0, 0.0, 0.0])
    assert (res.t, res.df, res.p) == (0.0, 2, 1.0)


def test_paired_hand_value():
    t, df, p = paired_t_test([1.0, 2.0, 3.0])
    assert t == pytest.approx(2 * math.sqrt(3), rel=1e-14)
    assert df == 2
    assert p == pytest.approx(t_two_sided_quad(t, 2), abs=1e-10)


def test_single_observation_degenerate():
    with pytest.raises(DegenerateSample):
        paired_t_test([0.5])


def test_constant_nonzero_diffs_degenerate():
    with pytest.raises(DegenerateSample):
        paired_t_test([0.5, 0.5, 0.5])


samples = st.lists(st.floats(min_value=-0.1, max_value=0.1, allow_subnormal=False),
                   min_size=3, max_size=50).filter(lambda x: np.ptp(x) > 1e-6)


@given(samples)
def test_negating_diffs_negates_t(d):
    a = paired_t_test(d)
    b = paired_t_test([-x for x in d])
    assert b.t == pytest.approx(-a.t, rel=1e-12, abs=1e-12)
    assert b.p == pytest.approx(a.p, rel=1e-12, abs=1e-15)
    assert 0.0 <= a.p <= 1.0


@given(samples)
def test_paired_matches_brute(d):
    t, df = paired_t_brute(d)
    res = paired_t_test(d)
    assert res.df == df
    assert res.t == pytest.approx(t, rel=1e-10, abs=1e-10)


def test_welch_identical_samples():
    assert welch_t_test([1.0, 2.0, 4.0], [1.0, 2.0, 4.0]).t == 0.0


def test_welch_sign_convention():
    a = [-0.1, 0.1, -0.1, 0.1]
    b = [0.9, 1.1, 0.9, 1.1]
    assert welch_t_test(a, b).t < 0
    assert welch_t_test(b, a).t > 0


def test_welch_brute_oracle():
    t, df = welch_brute([1, 2, 3], [2, 4, 6])
    res = welch_t_test([1, 2, 3], [2, 4, 6])
    assert res.t == pytest.approx(t, rel=1e-12)
    assert res.df == pytest.approx(df, rel=1e-12)
    assert res.p == pytest.approx(t_two_sided_quad(t, df), abs=1e-9)


@pytest.mark.parametrize("p, stars", [
    (0.0005, "***"), (0.001, "**"), (0.0099, "**"), (0.01, "*"), (0.03, "*"),
    (0.05, ""), (0.2, ""), (float("nan"), ""),
])
def test_star_thresholds(p, stars):
    assert significance_stars(p) == stars


@pytest.mark.parametrize("a, b", [(0.5, 0.5), (2.0, 3.0), (10.0, 0.5), (150.0, 0.5), (0.5, 40.0)])
def test_betainc_against_scipy(a, b):
    for x in np.linspace(0.0, 1.0, 41):
        assert betainc(a, b, x) == pytest.approx(special.betainc(a, b, x), abs=1e-13)


@pytest.mark.parametrize("df", [1, 2, 3, 5, 10, 30, 120, 1000])
@pytest.mark.parametrize("t", [0.0, 0.3, 1.0, 1.96, 2.5, 4.0, 10.0])
def test_t_pvalue_against_integrated_density(t, df):
    assert student_t_two_sided(t, df) == pytest.approx(t_two_sided_quad(t, df), abs=1e-6)
    assert student_t_two_sided(-t, df) == student_t_two_sided(t, df)


def test_t_cdf_symmetry_and_normal_limit():
    assert student_t_cdf(0.0, 7) == pytest.approx(0.5, abs=1e-15)
    assert student_t_cdf(1.3, 9) + student_t_cdf(-1.3, 9) == pytest.approx(1.0, abs=1e-14)
    assert student_t_two_sided(1.96, 1e7) == pytest.approx(normal_two_sided(1.96), abs=1e-6)
    assert normal_two_sided(1.959963984540054) == pytest.approx(0.05, abs=1e-14)


def _pair(days, a, b):
    d = np.asarray(days, dtype="datetime64[D]")
    return ReturnSeries(d, np.asarray(a, dtype=float)), ReturnSeries(d, np.asarray(b, dtype=float))


def test_identical_series_summary():
    days = business_days("2002-01-07", 25)
    x = np.sin(np.arange(25.0))
    rows = weekday_summary(*_pair(days, x, x))
    assert [r.weekday for r in rows] == ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday"]
    for r in rows:
        assert r.mean_diff == 0.0 and r.t == 0.0 and r.stars == ""
        assert r.n == 5


def test_three_monday_hand_example():
    days = business_days("2002-01-07", 15)
    a = np.zeros(15)
    b = np.zeros(15)
    mondays = [0, 5, 10]
    a[mondays] = [0.01, 0.02, 0.03]
    b[1::5] = [0.01, -0.01, 0.02]
    rows = weekday_summary(*_pair(days, a, b))
    mon = rows[0]
    assert mon.mean_diff == pytest.approx(0.02, rel=1e-12)
    assert mon.t == pytest.approx(2 * math.sqrt(3), rel=1e-12)
    assert mon.df == 2
    assert mon.mean_diff == pytest.approx(mon.mean_a - mon.mean_b, abs=1e-12)


def test_summary_period_and_missing_weekday():
    days = business_days("2002-01-07", 30)
    x = np.linspace(-1, 1, 30)
    rows = weekday_summary(*_pair(days, x, 0.5 * x), period=(days[5], days[19]))
    assert all(r.n == 3 for r in rows)
    with pytest.raises(NoObservations):
        weekday_summary(*_pair(days, x, x), period=(days[0], days[2]))


@given(st.integers(min_value=0, max_value=10 ** 6))
def test_summary_mean_diff_identity(seed):
    rng = np.random.default_rng(seed)
    days = business_days("2002-01-07", 40)
    a, b = rng.normal(0, 0.01, 40), rng.normal(0, 0.01, 40)
    for r in weekday_summary(*_pair(days, a, b)):
        assert r.mean_diff == pytest.approx(r.mean_a - r.mean_b, abs=1e-12)
        assert 0.0 <= r.p <= 1.0
        assert r.se_diff == pytest.approx(r.sd_diff / math.sqrt(r.n), rel=1e-14)


def test_welch_option():
    days = business_days("2002-01-07", 40)
    rng = np.random.default_rng(3)
    a, b = rng.normal(0, 1, 40), rng.normal(0, 2, 40)
    rows = weekday_summary(*_pair(days, a, b), test="welch")
    t, df = welch_brute(list(a[::5]), list(b[::5]))
    assert rows[0].t == pytest.approx(t, rel=1e-12)
    assert rows[0].df == pytest.approx(df, rel=1e-12)

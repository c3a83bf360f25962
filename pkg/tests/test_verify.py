import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hetdiff.densities import CdfTable
from hetdiff.errors import DomainError, NumericalError
from hetdiff.model import ModelParams, SkewSpec
from hetdiff.simulate import PathGrid, SimConfig, simulate_bessel_from_besq, simulate_het
from hetdiff.verify import (
    ExitQuery,
    GofReport,
    balance_profile,
    balance_ratio,
    derive_seed,
    estimate_exit_probability,
    estimate_skewness,
    exit_outcomes,
    exit_probability_theoretical,
    ks_statistic,
    local_time_estimate,
    occupation_near_zero,
    occupation_slope,
    run_suite,
    trap_violations,
    two_sample_ks,
)

finite = st.floats(-1e3, 1e3, allow_nan=False)


# --- KS distances -------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(st.lists(finite, min_size=1, max_size=200))
def test_ks_matches_scipy(xs):
    assert ks_statistic(xs, stats.norm.cdf) == pytest.approx(stats.kstest(xs, "norm").statistic, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.lists(finite, min_size=1, max_size=100), st.lists(finite, min_size=1, max_size=100))
def test_two_sample_matches_scipy(a, b):
    assert two_sample_ks(a, b) == pytest.approx(stats.ks_2samp(a, b).statistic, abs=1e-12)


def test_ks_trivial_cases():
    assert ks_statistic([0.0], stats.norm.cdf) == 0.5
    assert ks_statistic([-50.0, -40.0], stats.norm.cdf) == pytest.approx(1.0)
    x = np.array([0.3, 1.2, 2.0])
    assert two_sample_ks(x, x) == 0.0
    assert two_sample_ks(x, x + 10) == 1.0


def test_ks_self_sample_below_critical_value():
    n = 10_000
    crit = stats.kstwobign.ppf(0.99) / math.sqrt(n)
    assert crit == pytest.approx(1.63 / math.sqrt(n), rel=2e-3)
    x = np.random.default_rng(20261017).standard_normal(n)
    assert ks_statistic(x, stats.norm.cdf) < crit


def test_two_sample_bessel_below_critical_value():
    n = 10_000
    crit = stats.kstwobign.ppf(0.99) * math.sqrt(2 / n)
    a = simulate_bessel_from_besq(1.0, 1.5, SimConfig(steps=512, paths=n, seed=1)).terminal
    b = simulate_bessel_from_besq(1.0, 1.5, SimConfig(steps=512, paths=n, seed=2)).terminal
    assert two_sample_ks(a, b) < crit


def test_ks_rejects_non_monotone_table():
    bad = lambda x: np.cos(x)
    with pytest.raises(NumericalError):
        ks_statistic(np.linspace(0, 3, 20), bad)
    with pytest.raises(DomainError):
        ks_statistic([], stats.norm.cdf)


def test_ks_accepts_cdf_table():
    tab = CdfTable(np.linspace(0, 1, 11), np.linspace(0, 1, 11))
    assert ks_statistic([0.5], tab) == 0.5


# --- exit problems ------------------------------------------------------------

@pytest.mark.parametrize("delta, theta, x, expected", [
    (1.0, 0.0, 0.0, 0.5),
    (1.0, 0.5, 0.0, 0.75),
    (1.3, 0.4, 0.0, 0.7),
    (1.5, 0.0, 0.25, (2 * 0.25 ** 0.5 + 2) / 4),
])
def test_exit_probability_examples(delta, theta, x, expected):
    p = exit_probability_theoretical(ExitQuery(-1.0, 1.0, x), SkewSpec(delta, theta))
    assert p == pytest.approx(expected, rel=1e-14)


@given(st.floats(0.05, 1.95), st.floats(-0.95, 0.95), st.floats(0.05, 20))
def test_exit_symmetric_interval_gives_sign_law(d, th, b):
    p = exit_probability_theoretical(ExitQuery(-b, b, 0.0), SkewSpec(d, th))
    assert p == pytest.approx(0.5 * (1 + th), rel=1e-12)


@settings(max_examples=60)
@given(st.floats(0.05, 1.95), st.floats(-0.95, 0.95), st.floats(0.01, 0.99), st.floats(0.01, 100))
def test_exit_probability_scale_invariant_and_mirrored(d, th, u, c):
    q = ExitQuery(-1.0, 2.0, -1.0 + 3.0 * u)
    spec = SkewSpec(d, th)
    p = exit_probability_theoretical(q, spec)
    assert 0.0 <= p <= 1.0
    scaled = ExitQuery(c * q.a, c * q.b, c * q.x)
    assert exit_probability_theoretical(scaled, spec) == pytest.approx(p, abs=1e-12)
    mirror = ExitQuery(-q.b, -q.a, -q.x)
    assert exit_probability_theoretical(mirror, SkewSpec(d, -th)) == pytest.approx(1 - p, abs=1e-12)


def test_exit_probability_monotone_in_start():
    spec = SkewSpec(0.8, -0.3)
    xs = np.linspace(-0.99, 0.99, 51)
    ps = [exit_probability_theoretical(ExitQuery(-1, 1, x), spec) for x in xs]
    assert np.all(np.diff(ps) > 0)


def test_exit_query_validation():
    with pytest.raises(DomainError):
        ExitQuery(1.0, 1.0, 1.0)
    with pytest.raises(DomainError):
        ExitQuery(-1.0, 1.0, 2.0)
    with pytest.raises(DomainError):
        exit_probability_theoretical(ExitQuery(-1, 1, 0), SkewSpec(1.0, 1.0))


def test_exit_outcomes():
    v = np.array([[0.0, 0.5, 1.1, -2.0],
                  [0.0, -1.0, 2.0, 0.0],
                  [0.0, 0.2, -0.2, 0.1]])
    assert exit_outcomes(v, -1.0, 1.0).tolist() == [1, -1, 0]


def test_estimate_exit_probability_small_run():
    rep = estimate_exit_probability(ExitQuery(-1.0, 1.0, 0.0), SkewSpec(1.0, 0.0),
                                    SimConfig(horizon=5.0, steps=1024, paths=2000, seed=7))
    assert rep.passed
    assert rep.details["unresolved_fraction"] < 0.05
    assert rep.threshold == pytest.approx(3 * math.sqrt(0.25 / rep.n))


def test_estimate_exit_probability_censored_is_inconclusive():
    rep = estimate_exit_probability(ExitQuery(-1.0, 1.0, 0.0), SkewSpec(1.0, 0.0),
                                    SimConfig(horizon=0.05, steps=64, paths=200, seed=7))
    assert rep.inconclusive and rep.passed is None


# --- skewness -----------------------------------------------------------------

def test_skewness_trivial():
    assert estimate_skewness(np.ones(5)) == 1.0
    assert estimate_skewness(-np.ones(5)) == -1.0
    with pytest.raises(DomainError):
        estimate_skewness(np.array([]))


@given(st.lists(st.floats(-10, 10).filter(lambda v: v != 0), min_size=1, max_size=50))
def test_skewness_mirror_and_formula(z):
    z = np.array(z)
    th = estimate_skewness(z)
    assert estimate_skewness(-z) == pytest.approx(-th)
    assert th == pytest.approx(2 * np.mean(z > 0) - 1)
    assert -1 <= th <= 1


def test_skewness_accepts_pathgrids():
    g = PathGrid([0.0, 1.0], [[0.0, 1.0], [0.0, -2.0], [0.0, 3.0]])
    assert estimate_skewness(g) == pytest.approx(1 / 3)
    assert estimate_skewness([g, g]) == pytest.approx(1 / 3)


def test_skewness_symmetric_simulation():
    x = simulate_het(0.0, ModelParams(0.5, 0.5), 0.0, SimConfig(steps=256, paths=10_000, seed=3)).terminal
    assert abs(estimate_skewness(x)) <= 2 * 3 / math.sqrt(x.size)


# --- occupation and local time ---------------------------------------------------

def test_occupation_large_eps_is_horizon():
    g = PathGrid(np.linspace(0, 2, 11), [np.linspace(-3, 3, 11)])
    assert occupation_near_zero(g, 1e9) == pytest.approx(2.0)


def test_occupation_after_absorption_grows_linearly():
    t = np.linspace(0, 4, 9)
    v = np.array([[1.0, 0.5, 0.2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]])
    occ = [occupation_near_zero((t[:k + 1], v[:, :k + 1]), 1e-3) for k in range(3, 9)]
    assert np.allclose(np.diff(occ), 0.5)


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=40), st.floats(1e-3, 3), st.floats(1e-3, 3))
def test_occupation_monotone_in_eps(vals, e1, e2):
    t = np.linspace(0, 1, len(vals))
    lo, hi = sorted((e1, e2))
    assert occupation_near_zero((t, vals), lo) <= occupation_near_zero((t, vals), hi)


def test_occupation_slope_of_power_law():
    eps = np.array([0.02, 0.04, 0.08, 0.16])
    assert occupation_slope(3.0 * eps ** 1.4, eps) == pytest.approx(1.4)


def test_local_time_zero_away_from_level():
    g = PathGrid(np.linspace(0, 1, 5), [[2.0, 2.5, 3.0, 2.2, 2.8]])
    assert local_time_estimate(g, 0.0, 0.5, 0.5) == 0.0
    with pytest.raises(DomainError):
        local_time_estimate(g, 0.0, 0.0, 0.5)


def test_brownian_local_time_mean():
    # E L_1^0 = E|B_1| = sqrt(2/pi), computed here from the density of |B_1|
    target = 2 * stats.norm.expect(lambda x: x, lb=0)
    assert target == pytest.approx(math.sqrt(2 / math.pi), rel=1e-10)
    n, paths, eps = 2 ** 14, 10_000, 0.05
    rng = np.random.default_rng(77)
    t = np.linspace(0, 1, n + 1)
    est = []
    for _ in range(paths // 500):
        b = np.zeros((500, n + 1))
        np.cumsum(rng.standard_normal((500, n)) * math.sqrt(1 / n), axis=1, out=b[:, 1:])
        est.append(local_time_estimate((t, b), 0.0, eps, 0.0))
    assert np.mean(np.concatenate(est)) == pytest.approx(target, rel=0.1)


# --- balance ------------------------------------------------------------------

def test_balance_symmetric_is_one():
    p = ModelParams(0.5, 0.5)
    levels = np.array([0.01, 0.02, 0.04])
    g = simulate_het(0.0, p, 0.0, SimConfig(steps=2048, paths=2000, seed=31))
    assert balance_ratio(g, p, levels) == pytest.approx(1.0, rel=0.25)


def test_balance_transient_is_inconclusive():
    p = ModelParams(0.5, 1.0)
    g = simulate_het(1.0, p, 0.0, SimConfig(steps=128, paths=50, seed=32))
    r = balance_ratio(g, p, [0.01, 0.02])
    assert math.isnan(r)
    rep = GofReport("balance_ratio", abs(r / 3 - 1), 0.4, 50)
    assert rep.inconclusive and rep.passed is None


def test_balance_profile_reduce_matches_paths():
    p = ModelParams(0.5, 0.5)
    levels = [0.02, 0.05]
    cfg = SimConfig(steps=256, paths=40, seed=33)
    g = simulate_het(0.0, p, 0.3, cfg)
    prof = simulate_het(0.0, p, 0.3, cfg, reduce=balance_profile(p, levels, np.array(levels) / 2))
    assert prof.shape == (40, 4)
    assert np.allclose(prof[:, 0], local_time_estimate(g, 0.02, 0.01, 0.5))
    assert np.allclose(prof[:, 3], local_time_estimate(g, -0.05, 0.025, 0.5))


# --- trap checks -----------------------------------------------------------------

def test_trap_violations():
    t = np.linspace(0, 1, 5)
    v = np.array([[1.0, 0.0, 0.0, 0.0, 0.0],
                  [1.0, 0.5, 1e-12, 0.0, 0.0],
                  [1.0, 0.0, 0.1, 0.0, 0.0],
                  [1.0, 0.9, 0.8, 0.7, 0.6]])
    bad, entered = trap_violations(t, v, 1e-9)
    assert bad == 2
    assert entered.tolist() == [True, True, True, False]


# --- reports ----------------------------------------------------------------------

def test_report_semantics():
    assert GofReport("a", 0.01, 0.02, 10).passed is True
    assert GofReport("a", 0.03, 0.02, 10).passed is False
    r = GofReport("a", math.nan, 0.02, 10)
    assert r.inconclusive and r.passed is None
    d = json.loads(r.to_json())
    assert d["statistic"] is None
    assert set(d) == {"test_name", "statistic", "threshold", "n", "seed", "passed", "details",
                      "inconclusive", "diagnostic"}
    r = GofReport("b", np.float64(0.5), 1, 3, details={"x": np.arange(2), "y": np.float32(1.5)})
    assert json.loads(r.to_json())["details"] == {"x": [0, 1], "y": 1.5}


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(5, "x") == derive_seed(5, "x")
    assert len({derive_seed(5, "x"), derive_seed(5, "y"), derive_seed(6, "x")}) == 3
    assert 0 <= derive_seed(2 ** 64 - 1, "x") < 2 ** 63


def test_suites_reproducible_and_small():
    base = SimConfig(steps=256, paths=400, seed=99)
    a = run_suite("skew", base)
    b = run_suite("skew", SimConfig(steps=256, paths=400, seed=99, threads=3, block_size=64))
    assert [r.statistic for r in a] == [r.statistic for r in b]
    trap = run_suite("trap", SimConfig(steps=256, seed=1), paths=200)
    names = [r.test_name for r in trap]
    assert names == ["trap_no_escape", "trap_absorbed_fraction_t1"]
    assert trap[0].statistic == 0 and trap[0].passed


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("nope", SimConfig(paths=1))

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from hetdiff.densities import (
    CdfTable,
    DensityQuery,
    bessel_cdf,
    bessel_density,
    cdf_from_density,
    het_cdf,
    het_density,
    killed_density,
    skew_density,
    skew_density_cases,
    survival_probability,
)
from hetdiff.errors import DomainError, NumericalError
from hetdiff.model import ModelParams, h_transform
from hetdiff.quadrature import integrate

INF = math.inf


def mass(f, lo, hi, points=()):
    return integrate(f, lo, hi, points=points, atol=1e-11, rtol=1e-11)


# --- bessel_density --------------------------------------------------------

def test_origin_to_origin_vanishes_for_delta3():
    assert bessel_density(1.0, 0.0, 0.0, 3.0) == 0.0


def test_delta3_from_zero_is_maxwell():
    y = np.linspace(0.0, 6.0, 61)
    maxwell = y ** 2 * math.sqrt(2 / math.pi) * np.exp(-y ** 2 / 2)
    assert np.allclose(bessel_density(1.0, 0.0, y, 3.0), maxwell, rtol=1e-13, atol=1e-300)


def test_delta3_from_zero_matches_gaussian_norm_histogram():
    rng = np.random.default_rng(11)
    r = np.linalg.norm(rng.standard_normal((200_000, 3)), axis=1)
    edges = np.linspace(0, 4, 21)
    counts, _ = np.histogram(r, edges)
    probs = np.array([mass(lambda y: bessel_density(1.0, 0.0, y, 3.0), a, b)
                      for a, b in zip(edges[:-1], edges[1:])])
    se = np.sqrt(probs * (1 - probs) / r.size)
    assert np.all(np.abs(counts / r.size - probs) <= 5 * se + 1e-12)


def test_normalization_example():
    assert mass(lambda y: bessel_density(1.0, 1.0, y, 1.5), 0, INF, [1.0]) == pytest.approx(1, abs=1e-8)


def test_origin_branch_is_limit():
    y = np.array([0.3, 1.0, 2.2])
    for d in (0.7, 1.5, 3.0):
        lim = bessel_density(1.0, 0.0, y, d)
        near = bessel_density(1.0, 1e-6, y, d)
        assert np.allclose(near, lim, rtol=1e-4)


def test_bessel_domain_errors():
    with pytest.raises(DomainError):
        bessel_density(1.0, 1.0, 1.0, 0.0)
    with pytest.raises(DomainError):
        bessel_density(0.0, 1.0, 1.0, 1.5)
    with pytest.raises(DomainError):
        bessel_density(1.0, -1.0, 1.0, 1.5)


def test_large_arguments_do_not_overflow():
    # x y / t far beyond the range where exp(z) overflows
    p = bessel_density(0.01, 30.0, 30.05, 1.5)
    assert math.isfinite(p) and p > 0
    assert p == pytest.approx(stats.norm.pdf(0.05, scale=0.1), rel=0.05)


def test_query_type():
    q = DensityQuery(1.0, 0.5, 0.8)
    assert q.evaluate(bessel_density, 1.5) == bessel_density(1.0, 0.5, 0.8, 1.5)
    with pytest.raises(DomainError):
        DensityQuery(0.0, 1.0, 1.0)


# --- killed_density --------------------------------------------------------

@pytest.mark.parametrize("t, x", [(0.3, 0.2), (1.0, 1.0), (2.5, 3.0)])
def test_killed_delta1_is_method_of_images(t, x):
    y = np.linspace(0.01, 6, 80)
    images = stats.norm.pdf(y - x, scale=math.sqrt(t)) - stats.norm.pdf(y + x, scale=math.sqrt(t))
    assert np.allclose(killed_density(t, x, y, 1.0), images, rtol=1e-11, atol=1e-300)


def test_killed_below_free_density():
    y = np.linspace(0.01, 5, 60)
    for d in (0.3, 1.0, 1.7):
        for x in (0.2, 1.0, 2.0):
            assert np.all(killed_density(1.0, x, y, d) <= bessel_density(1.0, x, y, d) * (1 + 1e-12))


def test_killed_mass_below_one():
    m = mass(lambda y: killed_density(1.0, 1.0, y, 1.0), 0, INF, [1.0])
    assert m < 1
    assert m == pytest.approx(2 * stats.norm.cdf(1.0) - 1, rel=1e-9)


def test_killed_domain_errors():
    with pytest.raises(DomainError):
        killed_density(1.0, 1.0, 1.0, 2.0)
    with pytest.raises(DomainError):
        killed_density(1.0, 0.0, 1.0, 1.0)


# --- survival_probability --------------------------------------------------

@pytest.mark.parametrize("t, x", [(1.0, 2.0), (0.5, 0.3), (4.0, 1.0)])
def test_survival_delta0_closed_form(t, x):
    # BESQ^0 from x^2: P(tau_0 > t) = 1 - exp(-x^2 / 2t)
    assert survival_probability(t, x, 0.0) == pytest.approx(1 - math.exp(-x * x / (2 * t)), rel=1e-9)


def test_survival_delta1_is_brownian():
    assert survival_probability(1.0, 1.0, 1.0) == pytest.approx(2 * stats.norm.cdf(1.0) - 1, rel=1e-9)


def test_survival_decreasing_in_t():
    s = [survival_probability(t, 1.0, d) for d in (-0.5, 0.5) for t in (0.2, 0.5, 1.0, 3.0)]
    assert np.all(np.diff(s[:4]) < 0) and np.all(np.diff(s[4:]) < 0)
    assert all(0 <= v <= 1 for v in s)


# --- skew_density ----------------------------------------------------------

def test_skew_theta0_positive_quadrant_is_average():
    y = np.linspace(0.1, 3, 12)
    got = skew_density(1.0, 0.7, y, 1.3, 0.0)
    avg = 0.5 * (bessel_density(1.0, 0.7, y, 1.3) + killed_density(1.0, 0.7, y, 1.3))
    assert np.allclose(got, avg, rtol=1e-13)


def test_skew_theta0_even():
    y = np.linspace(-3, 3, 25)
    for x in (0.0, 0.4, -1.2):
        assert np.allclose(skew_density(1.0, x, y, 0.8, 0.0), skew_density(1.0, -x, -y, 0.8, 0.0), rtol=1e-14)


def test_skew_normalization_example():
    f = lambda y: skew_density(1.0, 0.5, y, 1.3, 0.4)
    assert mass(f, -INF, INF, [0.0, 0.5]) == pytest.approx(1.0, abs=1e-7)


def test_skew_from_origin_reduces_to_weighted_bessel():
    y = np.array([-2.0, -0.3, 0.5, 1.4])
    got = skew_density(0.8, 0.0, y, 1.2, 0.6)
    ref = 0.5 * (1 + 0.6 * np.sign(y)) * bessel_density(0.8, 0.0, np.abs(y), 1.2)
    assert np.allclose(got, ref, rtol=1e-14)


def test_case_form_matches_unified_form():
    rng = np.random.default_rng(5)
    for _ in range(40):
        d, th = rng.uniform(0.1, 1.9), rng.uniform(-0.95, 0.95)
        t = rng.uniform(0.2, 3)
        x, y = rng.uniform(-3, 3, 2)
        a = skew_density(t, x, y, d, th)
        b = skew_density_cases(t, x, y, d, th)
        if a > 0 and b > 0:
            assert a == pytest.approx(b, rel=1e-12)


def test_literal_case_form_is_not_a_density():
    f = lambda y: skew_density_cases(1.0, 0.5, np.where(y == 0, 1e-300, y), 1.3, 0.4, literal=True)
    assert abs(mass(f, -INF, INF, [0.0, 0.5]) - 1) > 0.1
    # at theta = 0 the two readings coincide
    g = lambda y: skew_density_cases(1.0, 0.5, np.where(y == 0, 1e-300, y), 1.3, 0.0, literal=True)
    assert mass(g, -INF, INF, [0.0, 0.5]) == pytest.approx(1.0, abs=1e-7)


def test_decomposition_positive():
    y = np.linspace(0.01, 5, 50)
    for d in (0.2, 0.9, 1.6):
        for x in (0.1, 1.0, 3.0):
            assert np.all(bessel_density(1.0, x, y, d) - killed_density(1.0, x, y, d) >= -1e-15)


def test_skew_domain_error():
    with pytest.raises(DomainError):
        skew_density(1.0, 0.0, 1.0, 2.0, 0.0)


@settings(max_examples=15, deadline=None)
@given(d=st.floats(0.2, 1.8), th=st.floats(-0.9, 0.9), x=st.floats(-2, 2))
def test_skew_normalization_property(d, th, x):
    f = lambda y: skew_density(1.0, x, y, d, th)
    assert integrate(f, -INF, INF, points=[0.0, x]) == pytest.approx(1.0, abs=1e-6)


# --- Chapman-Kolmogorov ------------------------------------------------------

@pytest.mark.parametrize("d", [0.7, 1.5, 3.0])
def test_chapman_kolmogorov_plain(d):
    x, y, s, t = 0.8, 1.3, 0.4, 0.7
    f = lambda u: bessel_density(s, x, u, d) * bessel_density(t, u, y, d)
    assert mass(f, 0, INF, [x, y]) == pytest.approx(bessel_density(s + t, x, y, d), rel=1e-5)


def test_chapman_kolmogorov_skew():
    x, y, s, t, d, th = -0.6, 0.9, 0.5, 0.5, 1.3, 0.4
    f = lambda u: skew_density(s, x, u, d, th) * skew_density(t, u, y, d, th)
    assert mass(f, -INF, INF, [x, 0.0, y]) == pytest.approx(skew_density(s + t, x, y, d, th), rel=1e-5)


# --- het_density -----------------------------------------------------------

def _het(t, x, params, theta):
    return lambda y: het_density(t, x, np.where(y == 0, 1e-300, y), params, theta)


def test_het_normalization_example():
    m = mass(_het(1.0, 1.0, ModelParams(0.5, 0.5), 0.0), -INF, INF, [0.0, 1.0])
    assert m == pytest.approx(1.0, abs=1e-6)


def test_het_even_from_origin_theta0():
    p = ModelParams(0.4, 0.6)
    y = np.linspace(0.1, 3, 15)
    assert np.allclose(het_density(1.0, 0.0, y, p, 0.0), het_density(1.0, 0.0, -y, p, 0.0), rtol=1e-14)


def test_het_rejects_zero():
    with pytest.raises(DomainError):
        het_density(1.0, 1.0, 0.0, ModelParams(0.5, 0.5))


def test_het_trap_mass_is_survival():
    p = ModelParams(0.6, 0.1)
    assert p.delta < 0
    m = mass(_het(1.0, 1.0, p, 0.0), -INF, INF, [0.0, 1.0])
    assert m == pytest.approx(survival_probability(1.0, h_transform(1.0, 0.6), p.delta), rel=1e-7)


def test_het_transient_from_origin_splits_by_theta():
    p = ModelParams(0.5, 1.0)
    f = _het(1.0, 0.0, p, 0.4)
    assert mass(f, 0, INF) == pytest.approx(0.7, abs=1e-7)
    assert mass(f, -INF, 0) == pytest.approx(0.3, abs=1e-7)


def test_het_transient_stays_on_side():
    p = ModelParams(0.5, 1.0)
    assert het_density(1.0, 1.0, -0.5, p, 0.3) == 0.0


# --- CDF tables ------------------------------------------------------------

def test_cdf_uniform_is_identity():
    tab = cdf_from_density(lambda u: np.ones_like(u), 0.0, 1.0)
    y = np.linspace(0, 1, 101)
    assert np.allclose(tab(y), y, atol=1e-12)


def test_cdf_bessel_mass():
    tab = bessel_cdf(1.0, 0.0, 3.0)
    assert tab.mass == pytest.approx(1.0, abs=1e-6)
    assert np.all(np.diff(tab.values) >= 0)


def test_cdf_interpolation_error():
    tab = cdf_from_density(lambda u: stats.norm.pdf(u), -12.0, 12.0)
    y = np.linspace(-5, 5, 2001)
    assert np.max(np.abs(tab(y) - stats.norm.cdf(y))) <= 1e-6


def test_cdf_het_mass():
    tab = het_cdf(1.0, 1.0, ModelParams(0.5, 0.5), 0.5)
    assert tab.mass == pytest.approx(1.0, abs=1e-6)


def test_cdf_negative_density_detected():
    with pytest.raises(NumericalError):
        cdf_from_density(lambda u: u - 0.5, 0.0, 1.0)


def test_cdf_table_validation():
    with pytest.raises(NumericalError):
        CdfTable([0.0, 1.0, 2.0], [0.0, 0.6, 0.5])


def _skew_mp(t, x, y, d, th):
    with mp.workdps(30 + int(abs(x * y) / t)):
        t, x, y, d, th = map(mp.mpf, (t, x, y, d, th))
        nu = d / 2 - 1
        ax, ay = abs(x), abs(y)
        pre = ay ** (nu + 1) * ax ** (-nu) / t * mp.exp(-(ax ** 2 + ay ** 2) / (2 * t))
        p, pk = pre * mp.besseli(nu, ax * ay / t), pre * mp.besseli(-nu, ax * ay / t)
        return float((pk if x * y > 0 else 0) + (1 + th * mp.sign(y)) / 2 * (p - pk))


@pytest.mark.parametrize("t, x, y", [(0.38, 1.7, -3.4), (0.26, 2.0, -1.9), (0.1, 3.0, -3.0),
                                     (0.05, -1.0, 2.0), (2.0, 3.5, 3.9)])
def test_skew_far_side_tail_against_high_precision(t, x, y):
    # far-side mass is exponentially small relative to the I terms it is built from
    for d, th in [(0.4, 0.3), (1.2, -0.6), (1.9, 0.95)]:
        ref = _skew_mp(t, x, y, d, th)
        assert skew_density(t, x, y, d, th) == pytest.approx(ref, rel=1e-12)
        assert skew_density_cases(t, x, y, d, th) == pytest.approx(ref, rel=1e-12)

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hetdiff.errors import DomainError
from hetdiff.specialfn import (
    bessel_i,
    bessel_i_scaled,
    bessel_k_scaled,
    log_abs_gamma,
    log_gamma,
    switch_point,
)

mp.mp.dps = 40

# ln Gamma(10.5) and e^-1 I_{1/2}(1), 40-digit mpmath evaluations frozen here
LGAMMA_10_5 = 13.9406252194037636331612378879718494798
I_HALF_1_SCALED = 0.344951313888244625989381859523668286736


def mp_ive(nu, z):
    return float(mp.besseli(nu, z) * mp.exp(-z))


# --- log_gamma -------------------------------------------------------------

def test_log_gamma_at_one_is_zero():
    assert abs(log_gamma(1.0)) < 1e-15


def test_log_gamma_half_is_log_sqrt_pi():
    assert log_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)


def test_log_gamma_frozen_value():
    assert log_gamma(10.5) == pytest.approx(LGAMMA_10_5, rel=1e-14)


def test_log_gamma_grid_against_mpmath():
    x = np.logspace(-3, 3, 400)
    got = log_gamma(x)
    ref = np.array([float(mp.loggamma(v)) for v in x])
    # relative accuracy away from the roots at 1 and 2, absolute 1e-15 near them
    assert np.all(np.abs(got - ref) <= 1e-13 * np.abs(ref) + 1e-15)


@pytest.mark.parametrize("bad", [0.0, -1.0, -2.5])
def test_log_gamma_rejects_nonpositive(bad):
    with pytest.raises(DomainError):
        log_gamma(bad)


@pytest.mark.parametrize("x", [-0.5, -1.5, -2.25, -4.7])
def test_log_abs_gamma_negative_arguments(x):
    val, sign = log_abs_gamma(x)
    ref = mp.gamma(x)
    assert sign == (1.0 if ref > 0 else -1.0)
    assert val == pytest.approx(float(mp.log(abs(ref))), rel=1e-13, abs=1e-14)


def test_log_abs_gamma_pole():
    with pytest.raises(DomainError):
        log_abs_gamma(-3.0)


# --- bessel_i_scaled -------------------------------------------------------

def test_i0_at_zero():
    assert bessel_i_scaled(0.0, 0.0) == 1.0


def test_positive_order_at_zero():
    assert bessel_i_scaled(1.3, 0.0) == 0.0


def test_negative_noninteger_order_at_zero_is_infinite():
    assert bessel_i_scaled(-0.4, 0.0) == math.inf


def test_negative_integer_reflection_example():
    assert bessel_i_scaled(-1.0, 2.0) == bessel_i_scaled(1.0, 2.0)


def test_half_integer_frozen_value():
    assert bessel_i_scaled(0.5, 1.0) == pytest.approx(I_HALF_1_SCALED, rel=1e-13)


def test_rejects_negative_argument():
    with pytest.raises(DomainError):
        bessel_i_scaled(0.5, -1.0)


@pytest.mark.parametrize("nu", [-4.7, -2.5, -1.0, -0.35, 0.0, 0.5, 1.0, 3.3, 12.0, 27.5, 50.0])
def test_grid_against_mpmath(nu):
    z = np.concatenate([[1e-4, 0.01, 0.5], np.linspace(1, 700, 60)])
    got = bessel_i_scaled(nu, z)
    ref = np.array([mp_ive(nu, v) for v in z])
    assert np.all(np.abs(got - ref) <= 1e-10 * np.abs(ref))


@settings(max_examples=60, deadline=None)
@given(nu=st.floats(-5, 50), z=st.floats(1e-3, 700))
def test_random_points_against_mpmath(nu, z):
    ref = mp_ive(nu, z)
    if abs(ref) < 1e-300:
        return
    assert bessel_i_scaled(nu, z) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("n", range(0, 7))
def test_integer_reflection_property(n):
    z = np.linspace(0.0, 100.0, 101)
    a = bessel_i_scaled(-n, z)
    b = bessel_i_scaled(n, z)
    assert np.all(np.abs(a - b) <= 1e-12 * np.abs(b))


@pytest.mark.parametrize("nu", [0.0, 0.5, 2.0, 7.0, 20.0, 40.0])
def test_continuity_across_switch_point(nu):
    z0 = switch_point(nu)
    below = bessel_i_scaled(nu, z0 * (1 - 1e-13))
    above = bessel_i_scaled(nu, z0 * (1 + 1e-13))
    assert abs(below - above) <= 1e-9 * abs(above)


@pytest.mark.parametrize("nu", [0.0, 0.5, 3.0, 25.0])
def test_unscaled_monotone_in_z(nu):
    z = np.linspace(0.01, 600, 500)
    assert np.all(np.diff(bessel_i(nu, z)) > 0)


@settings(max_examples=80, deadline=None)
@given(nu=st.floats(-3.5, 45), z=st.floats(0.05, 650))
def test_recurrence(nu, z):
    lhs = bessel_i_scaled(nu - 1, z) - bessel_i_scaled(nu + 1, z)
    rhs = 2 * nu / z * bessel_i_scaled(nu, z)
    scale = max(abs(bessel_i_scaled(nu - 1, z)), abs(bessel_i_scaled(nu + 1, z)))
    assert abs(lhs - rhs) <= 1e-9 * max(abs(rhs), scale * 1e-3)


def test_vectorized_matches_scalar():
    z = np.array([0.3, 4.0, 90.0])
    v = bessel_i_scaled(1.7, z)
    assert np.array_equal(v, np.array([bessel_i_scaled(1.7, float(x)) for x in z]))


# --- bessel_k_scaled ---------------------------------------------------------

def test_k_half_order_closed_form():
    # K_1/2(z) = sqrt(pi/(2z)) e^-z
    z = np.array([0.01, 1.0, 30.0, 49.0, 51.0, 400.0])
    assert np.allclose(bessel_k_scaled(0.5, z), np.sqrt(np.pi / (2 * z)), rtol=1e-14, atol=0)


@pytest.mark.parametrize("nu", [0.0, 0.2, 0.5, 0.9, 1.0, 1.7])
def test_k_grid_against_mpmath(nu):
    z = np.logspace(-3, 3, 60)
    ref = np.array([float(mp.besselk(nu, v) * mp.exp(v)) for v in z])
    assert np.max(np.abs(bessel_k_scaled(nu, z) / ref - 1)) <= 1e-13


@settings(max_examples=60, deadline=None)
@given(nu=st.floats(0.01, 0.99), z=st.floats(0.5, 40))
def test_k_is_difference_of_reflected_i(nu, z):
    # the I difference keeps only absolute accuracy: its exponentially small part is lost past z ~ 15
    diff = bessel_i_scaled(-nu, z) - bessel_i_scaled(nu, z)
    k = 2 / math.pi * math.sin(nu * math.pi) * bessel_k_scaled(nu, z) * math.exp(-2 * z)
    assert abs(diff - k) <= 2e-13 * bessel_i_scaled(-nu, z)


def test_k_even_in_order():
    assert bessel_k_scaled(-0.3, 2.0) == bessel_k_scaled(0.3, 2.0)


@pytest.mark.parametrize("z", [0.0, 1e-4, -1.0, float("nan")])
def test_k_rejects_small_arguments(z):
    with pytest.raises(DomainError):
        bessel_k_scaled(0.4, z)

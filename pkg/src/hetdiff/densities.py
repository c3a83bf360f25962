"""Closed-form transition densities and the quadrature helpers built on them.

Families
--------
``bessel_density``
    Bessel process of dimension ``delta > 0`` on ``[0, inf)``.
``killed_density``
    Bessel process killed at its first visit to 0, ``delta < 2``.
``skew_density``
    Skew Bessel process on the real line, ``0 < delta < 2``.
``het_density``
    The heterogeneous diffusion ``X = H^{-1}(Z)`` obtained by pushing a (skew)
    Bessel density through the inverse power map.

Every kernel is evaluated as ``exp(log-sum)`` with the exponentially scaled
Bessel function, using ``exp(-(x^2+y^2)/2t) I_nu(xy/t) =
exp(-(x-y)^2/2t) * [exp(-xy/t) I_nu(xy/t)]``.  All functions broadcast over
``x`` and ``y``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NumericalError
from .model import ModelParams, Regime, classify_regime, h_inverse, h_transform
from .quadrature import gk15_panels, integrate
from .specialfn import bessel_i_scaled, bessel_k_scaled, log_gamma

__all__ = [
    "DensityQuery",
    "bessel_density",
    "killed_density",
    "skew_density",
    "skew_density_cases",
    "het_density",
    "survival_probability",
    "CdfTable",
    "cdf_from_density",
    "bessel_cdf",
    "skew_cdf",
    "het_cdf",
]

# Gaussian tail cut used for finite integration ranges: exp(-GAUSS_CUT**2 / 2) ~ 1e-87
GAUSS_CUT = 20.0


@dataclass(frozen=True)
class DensityQuery:
    """A point ``(t, x, y)`` at which a transition density is evaluated."""

    t: float
    x: float
    y: float

    def __post_init__(self):
        if not self.t > 0:
            raise DomainError("t must be positive")

    def evaluate(self, density, *args):
        """``density(t, x, y, *args)``, e.g. ``q.evaluate(bessel_density, 1.5)``."""
        return density(self.t, self.x, self.y, *args)


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def _check_t(t):
    if not t > 0:
        raise DomainError(f"t must be positive, got {t}")


def _kernel(t, x, y, order, x_pow, y_pow):
    """t^-1 x^x_pow y^y_pow exp(-(x^2+y^2)/2t) I_order(xy/t) for x > 0, y > 0 (arrays)."""
    z = x * y / t
    small = z < 1e-10
    log_ie = np.empty(z.shape)
    with np.errstate(divide="ignore"):
        if (~small).any():
            log_ie[~small] = np.log(bessel_i_scaled(order, z[~small]))
        if small.any():
            # leading series term in logs; xy/t itself may underflow
            log_ie[small] = (order * (np.log(x[small]) + np.log(y[small]) - math.log(2.0 * t))
                             - log_gamma(order + 1.0) - z[small])
        logp = (-math.log(t) + x_pow * np.log(x) + y_pow * np.log(y)
                - (x - y) ** 2 / (2.0 * t) + log_ie)
    return np.exp(logp)


def bessel_density(t, x, y, delta):
    """Transition density of the ``delta``-dimensional Bessel process.

    Parameters
    ----------
    t : float
        Elapsed time, ``t > 0``.
    x, y : float or array_like
        Start and end points, both ``>= 0``; broadcast against each other.
    delta : float
        Dimension, ``delta > 0``.

    Returns
    -------
    float or ndarray
        The density in ``y``.  ``x = 0`` uses the limiting closed form.
    """
    if not delta > 0:
        raise DomainError("bessel_density needs delta > 0; use killed_density for delta <= 0")
    _check_t(t)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(x < 0) or np.any(y < 0):
        raise DomainError("bessel_density is defined for x, y >= 0")
    nu = delta / 2.0 - 1.0
    out = np.zeros(x.shape)

    inner = (x > 0) & (y > 0)
    if inner.any():
        out[inner] = _kernel(t, x[inner], y[inner], nu, -nu, nu + 1.0)

    origin = x == 0
    if origin.any():
        yo = y[origin]
        with np.errstate(divide="ignore"):
            log_c = -nu * math.log(2.0) - (nu + 1.0) * math.log(t) - log_gamma(nu + 1.0)
            out[origin] = np.exp(log_c - yo ** 2 / (2.0 * t)) * np.power(yo, 2.0 * nu + 1.0)

    edge = (x > 0) & (y == 0)
    if edge.any():
        # y^(nu+1) I_nu(xy/t) ~ y^(2nu+1) (x/2t)^nu / Gamma(nu+1)
        expo = 2.0 * nu + 1.0
        if expo > 0:
            out[edge] = 0.0
        elif expo < 0:
            out[edge] = np.inf
        else:
            xe = x[edge]
            out[edge] = np.exp(-xe ** 2 / (2.0 * t) - math.log(t) - nu * math.log(2.0 * t)
                               - log_gamma(nu + 1.0))
    return _out(out)


def killed_density(t, x, y, delta):
    """Density of the Bessel process killed at 0 (sub-probability in ``y``).

    Defined for ``delta < 2``, ``x > 0``, ``y >= 0``.  The Bessel order is
    ``1 - delta/2`` on both sides of ``delta = 0``, so a single kernel covers
    the whole range.
    """
    if not delta < 2:
        raise DomainError("no killing for delta >= 2")
    _check_t(t)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(x <= 0):
        raise DomainError("killed_density needs x > 0 (the path is killed immediately at 0)")
    if np.any(y < 0):
        raise DomainError("killed_density is defined for y >= 0")
    mu = 1.0 - delta / 2.0
    out = np.zeros(x.shape)
    pos = y > 0
    if pos.any():
        out[pos] = _kernel(t, x[pos], y[pos], mu, mu, 1.0 - mu)
    return _out(out)


def _visited(t, ax, ay, delta):
    """Mass that has visited 0, ``p - p_killed``, at ``|x| > 0``, ``|y|``.

    Equals the common prefactor times ``I_nu - I_-nu`` with ``nu = delta/2 - 1``.
    That difference is ``2/pi sin(-nu pi) K_nu`` and is taken from ``K`` once
    ``xy/t > 1``; subtracting the two ``I`` values there loses about ``2xy/t``
    nats of precision.
    """
    nu = delta / 2.0 - 1.0
    z = ax * ay / t
    out = np.empty(z.shape)
    # the killed part vanishes at y = 0
    edge = ay == 0
    if edge.any():
        out[edge] = bessel_density(t, ax[edge], ay[edge], delta)
    near = (z <= 1.0) & ~edge
    if near.any():
        a, b = ax[near], ay[near]
        diff = _kernel(t, a, b, nu, -nu, nu + 1.0) - _kernel(t, a, b, -nu, -nu, nu + 1.0)
        # non-negative in exact arithmetic; clip rounding-level cancellation
        out[near] = np.maximum(diff, 0.0)
    far = z > 1.0
    if far.any():
        a, b = ax[far], ay[far]
        logp = (-math.log(t) - nu * np.log(a) + (nu + 1.0) * np.log(b)
                - (a + b) ** 2 / (2.0 * t) + np.log(bessel_k_scaled(nu, z[far]))
                + math.log(2.0 / math.pi * math.sin(-nu * math.pi)))
        out[far] = np.exp(logp)
    return out


def _skew_parts(t, ax, ay, delta):
    """(p_killed, p - p_killed) at |x|, |y|; the killed part is 0 where x = 0."""
    pk = np.zeros(ax.shape)
    visited = np.asarray(bessel_density(t, ax, ay, delta), dtype=float).copy()
    live = ax > 0
    if live.any():
        pk[live] = killed_density(t, ax[live], ay[live], delta)
        visited[live] = _visited(t, ax[live], ay[live], delta)
    return pk, visited


def skew_density(t, x, y, delta, theta):
    """Transition density of the skew Bessel process, ``0 < delta < 2``.

    Unified form: the killed part stays on the starting side, and the mass that
    has visited zero, ``p - p_killed``, is split ``(1 + theta sign y) / 2``.
    At ``x = 0`` this reduces to ``(1 + theta sign y)/2 * p(t, 0, |y|)``.
    """
    if not 0 < delta < 2:
        raise DomainError("skew_density needs 0 < delta < 2")
    if not -1 <= theta <= 1:
        raise DomainError("theta must lie in [-1, 1]")
    _check_t(t)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    pk, visited = _skew_parts(t, np.abs(x), np.abs(y), delta)
    out = np.where(x * y > 0, pk, 0.0) + 0.5 * (1.0 + theta * np.sign(y)) * visited
    return _out(out)


def skew_density_cases(t, x, y, delta, theta, literal=False):
    """Four-case form of the skew Bessel density, ``x != 0``, ``y != 0``.

    With ``literal=True`` the two sign-changing cases use the mixed-sign
    coefficients ``(1-theta)/2 I_nu - (1+theta)/2 I_-nu`` for ``x > 0 > y``
    (and the mirror for ``x < 0 < y``); these do not integrate to one
    for ``theta != 0``.  The default uses the coefficients implied by the
    unified form, ``(1 -+ theta)/2 (I_nu - I_-nu)``, with the difference taken
    through ``K_nu`` at large ``xy/t`` where it would otherwise cancel.
    """
    if not 0 < delta < 2:
        raise DomainError("skew_density_cases needs 0 < delta < 2")
    _check_t(t)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(x == 0) or np.any(y == 0):
        raise DomainError("the case form needs x != 0 and y != 0")
    nu = delta / 2.0 - 1.0
    ax, ay = np.abs(x), np.abs(y)
    a_plus = _kernel(t, ax, ay, nu, -nu, nu + 1.0)    # I_nu part
    a_minus = _kernel(t, ax, ay, -nu, -nu, nu + 1.0)  # I_-nu part, same prefactor
    hp, hm = 0.5 * (1.0 + theta), 0.5 * (1.0 - theta)
    if literal:
        cross_pn = hm * a_plus - hp * a_minus   # x > 0, y < 0
        cross_np = hp * a_plus - hm * a_minus   # x < 0, y > 0
    else:
        diff = _visited(t, ax, ay, delta)
        cross_pn = hm * diff
        cross_np = hp * diff
    out = np.select(
        [(x > 0) & (y > 0), (x > 0) & (y < 0), (x < 0) & (y > 0)],
        [hp * a_plus + hm * a_minus, cross_pn, cross_np],
        default=hm * a_plus + hp * a_minus,
    )
    return _out(out)


def het_density(t, x, y, params, theta=0.0):
    """Density of the heterogeneous diffusion ``X_t`` started at ``x``.

    ``p^{delta,theta}(t, H(x), H(y)) |y|^(-alpha)``, where ``H`` is the power
    transform and ``|y|^(-alpha)`` its Jacobian.  In the transient regime the
    process stays on the side of ``x`` (sign drawn with ``P(+) = (1+theta)/2``
    from ``x = 0``); in the trap regime only the surviving (killed) part is a
    density, the rest is an atom at 0.

    Raises
    ------
    DomainError
        If any ``y == 0``.
    """
    if not isinstance(params, ModelParams):
        raise TypeError("params must be a ModelParams")
    _check_t(t)
    x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
    if np.any(y == 0):
        raise DomainError("het_density is not defined at y = 0")
    a, delta = params.alpha, params.delta
    zx = np.asarray(h_transform(x, a))
    zy = np.asarray(h_transform(y, a))
    jac = np.abs(y) ** (-a)
    regime = classify_regime(delta)
    if regime is Regime.SKEW_RECURRENT:
        base = np.asarray(skew_density(t, zx, zy, delta, theta))
    elif regime is Regime.TRANSIENT:
        same = np.sign(zx) == np.sign(zy)
        base = np.where(same, bessel_density(t, np.abs(zx), np.abs(zy), delta), 0.0)
        at0 = zx == 0
        if at0.any():
            w = 0.5 * (1.0 + theta * np.sign(zy))
            base = np.where(at0, w * bessel_density(t, 0.0, np.abs(zy), delta), base)
    else:
        base = np.zeros(zx.shape)
        live = (zx != 0) & (np.sign(zx) == np.sign(zy))
        if live.any():
            base[live] = killed_density(t, np.abs(zx[live]), np.abs(zy[live]), delta)
    return _out(base * jac)


def survival_probability(t, x, delta):
    """``P(tau_0 > t)`` for the Bessel process from ``x > 0``, ``delta < 2``.

    Integral of :func:`killed_density` over ``y`` by adaptive quadrature,
    clamped to ``[0, 1]``.
    """
    if not delta < 2:
        raise DomainError("survival_probability needs delta < 2")
    if not x > 0:
        raise DomainError("survival_probability needs x > 0")
    _check_t(t)
    hi = x + GAUSS_CUT * math.sqrt(t)
    try:
        val = integrate(lambda y: killed_density(t, x, y, delta), 0.0, hi,
                        points=[x], atol=1e-12, rtol=1e-10)
    except NumericalError as exc:
        raise NumericalError(f"survival quadrature failed for t={t}, x={x}, delta={delta}: {exc}")
    return min(1.0, max(0.0, val))


class CdfTable:
    """Piecewise-linear CDF tabulated on an adaptive grid.

    ``mass`` is the total integral over the tabulated range; calling the table
    below the grid gives 0 and above it gives ``mass``.
    """

    def __init__(self, grid, values):
        grid = np.asarray(grid, dtype=float)
        values = np.asarray(values, dtype=float)
        if grid.shape != values.shape or grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid and values must be 1-D arrays of equal length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise NumericalError("CDF grid is not strictly increasing")
        if np.any(np.diff(values) < 0):
            raise NumericalError("CDF table is not monotone")
        self.grid = grid
        self.values = values

    @property
    def mass(self):
        return float(self.values[-1])

    def __call__(self, y):
        return np.interp(y, self.grid, self.values, left=0.0, right=self.values[-1])


def cdf_from_density(density, lower, upper, points=(), tol=1e-6, max_panels=200000):
    """Tabulate ``F(y) = int_lower^y density`` with certified linear interpolation.

    Panels are bisected until (i) the Kronrod error summed over all panels is
    below ``tol / 4`` and (ii) on every panel the linear interpolant misses the
    integral up to the midpoint by at most ``tol / 2``.

    Raises
    ------
    NumericalError
        If the density returns a negative value or the panel budget runs out.
    """
    lower, upper = float(lower), float(upper)
    if not (np.isfinite(lower) and np.isfinite(upper) and lower < upper):
        raise ValueError("need finite lower < upper")

    def f(u):
        v = np.asarray(density(u), dtype=float)
        if np.any(v < 0):
            raise NumericalError("negative density value encountered")
        return v

    edges = np.unique(np.concatenate([
        np.linspace(lower, upper, 65),
        [p for p in points if lower < p < upper],
    ]))
    left, right = edges[:-1], edges[1:]
    whole, err = gk15_panels(f, left, right)
    half, err_h = gk15_panels(f, left, 0.5 * (left + right))
    while True:
        bad = np.abs(half - 0.5 * whole) > 0.5 * tol
        e = err + err_h
        if e.sum() > 0.25 * tol:
            order = np.argsort(e)[::-1]
            rest = e.sum() - np.cumsum(e[order])
            k = int(np.searchsorted(-rest, -0.125 * tol)) + 1
            bad[order[:k]] = True
        if not bad.any():
            break
        if left.size + bad.sum() > max_panels:
            raise NumericalError("cdf_from_density exceeded its panel budget")
        mid = 0.5 * (left[bad] + right[bad])
        if np.any((mid <= left[bad]) | (mid >= right[bad])):
            raise NumericalError("cdf_from_density reached floating-point resolution")
        nl = np.concatenate([left[bad], mid])
        nr = np.concatenate([mid, right[bad]])
        w, ew = gk15_panels(f, nl, nr)
        h, eh = gk15_panels(f, nl, 0.5 * (nl + nr))
        keep = ~bad
        left = np.concatenate([left[keep], nl])
        right = np.concatenate([right[keep], nr])
        whole = np.concatenate([whole[keep], w])
        err = np.concatenate([err[keep], ew])
        half = np.concatenate([half[keep], h])
        err_h = np.concatenate([err_h[keep], eh])

    order = np.argsort(left)
    grid = np.concatenate([left[order], right[order][-1:]])
    values = np.concatenate([[0.0], np.cumsum(whole[order])])
    return CdfTable(grid, values)


def bessel_cdf(t, x, delta, tol=1e-6):
    """CDF table of ``BES^delta`` at time ``t`` from ``x >= 0``."""
    hi = x + GAUSS_CUT * math.sqrt(t)
    return cdf_from_density(lambda y: bessel_density(t, x, y, delta), 0.0, hi,
                            points=[x] if x > 0 else (), tol=tol)


def skew_cdf(t, x, delta, theta, tol=1e-6):
    """CDF table of the skew Bessel process at time ``t`` from ``x``."""
    r = abs(x) + GAUSS_CUT * math.sqrt(t)
    return cdf_from_density(lambda y: skew_density(t, x, y, delta, theta), -r, r,
                            points=sorted({0.0, float(x)}), tol=tol)


def het_cdf(t, x, params, theta=0.0, tol=1e-6):
    """CDF table of the heterogeneous diffusion ``X_t`` from ``x`` (continuous part)."""
    a = params.alpha
    r = float(h_inverse(abs(h_transform(x, a)) + GAUSS_CUT * math.sqrt(t), a))

    def dens(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros(u.shape)
        nz = u != 0
        out[nz] = het_density(t, x, u[nz], params, theta)
        return out

    return cdf_from_density(dens, -r, r, points=sorted({0.0, float(x)}), tol=tol)

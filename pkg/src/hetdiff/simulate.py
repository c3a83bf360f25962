"""Path simulation: squared-Bessel Euler, random time change of Brownian motion,
direct Euler of the drift SDEs, and the heterogeneous-diffusion generator.

Paths are produced in fixed-size blocks; inside a block the time stepping is
vectorized over paths.  Each path draws from its own substreams
(:mod:`hetdiff.rng`), so results are bit-identical for any block-to-thread
assignment.

Every ``simulate_*`` function accepts an optional ``reduce`` callable.  When
given, it is called as ``reduce(times, values, absorbed_at)`` on each block at
full time resolution and the concatenated per-path results are returned
instead of a :class:`PathGrid`; this keeps memory flat for large ensembles.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ResourceError, UnsupportedError
from .model import ModelParams, Regime, SkewSpec, classify_regime, h_inverse, h_transform
from .rng import INCREMENTS, SIGNS, path_rng

__all__ = [
    "SimConfig",
    "PathGrid",
    "ClockTable",
    "simulate_besq",
    "simulate_bessel_from_besq",
    "build_clock",
    "simulate_time_changed",
    "simulate_sde_direct",
    "simulate_het",
    "simulate_het_direct",
    "CONSTRUCTIONS",
]

CONSTRUCTIONS = ("timechange", "besq", "direct")


@dataclass(frozen=True)
class SimConfig:
    """Grid, ensemble size and seeding for a simulation run.

    ``zero_band`` is the numerical zero: a value counts as 0 when its modulus
    is at most the band.  ``None`` means ``1e-9 * max(1, |start|)``.
    ``thin`` keeps every ``thin``-th grid point (the last one always).
    ``threads`` of ``None`` falls back to ``$HETDIFF_THREADS`` and then to the
    CPU count; it never changes the output.
    """

    horizon: float = 1.0
    steps: int = 4096
    paths: int = 10_000
    seed: int = 0
    zero_band: float | None = None
    thin: int = 1
    threads: int | None = None
    block_size: int = 512
    max_extensions: int = 400

    def __post_init__(self):
        if not self.horizon > 0:
            raise DomainError("horizon must be positive")
        if int(self.steps) < 2:
            raise DomainError("steps must be at least 2")
        if int(self.paths) < 1:
            raise DomainError("paths must be at least 1")
        if self.zero_band is not None and not self.zero_band > 0:
            raise DomainError("zero_band must be positive")
        if int(self.thin) < 1:
            raise DomainError("thin must be >= 1")
        if int(self.block_size) < 1:
            raise DomainError("block_size must be >= 1")

    @property
    def dt(self):
        return self.horizon / self.steps

    @property
    def times(self):
        return np.linspace(0.0, self.horizon, self.steps + 1)

    def band(self, scale=1.0):
        if self.zero_band is not None:
            return self.zero_band
        return 1e-9 * max(1.0, abs(scale))

    def worker_count(self):
        if self.threads is not None:
            return max(1, int(self.threads))
        env = os.environ.get("HETDIFF_THREADS")
        if env:
            return max(1, int(env))
        return os.cpu_count() or 1


@dataclass(frozen=True)
class PathGrid:
    """An ensemble of sampled trajectories on a common time grid.

    ``values[i, k]`` is path ``i`` at ``times[k]``.  ``absorbed_at[i]`` is the
    first grid index from which path ``i`` is identically 0, or ``-1``.
    """

    times: np.ndarray
    values: np.ndarray
    absorbed_at: np.ndarray = field(default=None)

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        values = np.atleast_2d(np.asarray(self.values, dtype=float))
        if times.ndim != 1 or values.shape[1] != times.size:
            raise ValueError("values must have one column per time")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise ValueError("times must start at 0 and increase strictly")
        ab = self.absorbed_at
        ab = np.full(values.shape[0], -1, dtype=np.int64) if ab is None else np.asarray(ab, dtype=np.int64)
        if ab.shape != (values.shape[0],):
            raise ValueError("absorbed_at needs one entry per path")
        if np.any(ab >= times.size):
            raise ValueError("absorbed_at index out of range")
        cols = np.arange(times.size)
        after = (ab[:, None] >= 0) & (cols[None, :] >= ab[:, None])
        if np.any(values[after] != 0.0):
            raise ValueError("absorbed paths must be exactly 0 from absorbed_at on")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "absorbed_at", ab)

    @property
    def n_paths(self):
        return self.values.shape[0]

    @property
    def terminal(self):
        return self.values[:, -1]

    def path(self, i):
        """Single-path view as a one-row PathGrid."""
        return PathGrid(self.times, self.values[i:i + 1], self.absorbed_at[i:i + 1])


@dataclass(frozen=True)
class ClockTable:
    """Additive clock ``tau(s) = int_0^s (R'(beta_u))^2 du`` on a Brownian grid."""

    s_grid: np.ndarray
    tau: np.ndarray

    def __post_init__(self):
        if self.tau[0] != 0.0 or np.any(np.diff(self.tau) < 0):
            raise ValueError("clock must start at 0 and be nondecreasing")

    def inverse(self, t):
        """Brownian time ``r_t`` with ``tau(r_t) = t`` (piecewise linear)."""
        return np.interp(t, self.tau, self.s_grid)


# ---------------------------------------------------------------------------
# block runner


def _stored_index(cfg):
    idx = np.arange(0, cfg.steps + 1, int(cfg.thin))
    if idx[-1] != cfg.steps:
        idx = np.append(idx, cfg.steps)
    return idx


def _run(kernel, cfg, reduce=None):
    bs = int(cfg.block_size)
    blocks = [np.arange(s, min(s + bs, cfg.paths)) for s in range(0, cfg.paths, bs)]
    times = cfg.times
    stored = _stored_index(cfg)

    def work(idx):
        vals, absorbed = kernel(idx)
        if reduce is not None:
            return np.asarray(reduce(times, vals, absorbed))
        ab = np.where(absorbed >= 0, np.searchsorted(stored, absorbed), -1)
        return vals[:, stored], ab

    workers = min(cfg.worker_count(), len(blocks))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(work, blocks))
    else:
        results = [work(b) for b in blocks]
    if reduce is not None:
        return np.concatenate(results)
    return PathGrid(times[stored], np.vstack([r[0] for r in results]),
                    np.concatenate([r[1] for r in results]))


def _normals(seed, idx, n, stream=INCREMENTS):
    return np.stack([path_rng(seed, i, stream).standard_normal(n) for i in idx])


# ---------------------------------------------------------------------------
# squared Bessel


def _besq_block(y0, delta, cfg, idx, absorb):
    n, dt = cfg.steps, cfg.dt
    dw = _normals(cfg.seed, idx, n) * math.sqrt(dt)
    b = idx.size
    out = np.empty((b, n + 1))
    out[:, 0] = y0
    absorbed = np.full(b, -1, dtype=np.int64)
    y = np.full(b, float(y0))
    band2 = cfg.band(math.sqrt(max(y0, 0.0))) ** 2
    alive = np.ones(b, dtype=bool)
    if absorb and y0 <= band2:
        out[:] = 0.0
        absorbed[:] = 0
        return out, absorbed
    for k in range(n):
        # full truncation: the diffusion coefficient sees max(Y, 0)
        y = y + delta * dt + 2.0 * np.sqrt(np.maximum(y, 0.0)) * dw[:, k]
        if absorb:
            hit = alive & (y <= band2)
            if hit.any():
                absorbed[hit] = k + 1
                alive &= ~hit
            y[~alive] = 0.0
        out[:, k + 1] = y
    return out, absorbed


def simulate_besq(y0, delta, cfg, reduce=None):
    """Euler paths of ``dY = delta dt + 2 sqrt(Y) dB`` with full truncation.

    For ``delta <= 0`` the path is absorbed at its first entry into the zero
    band (``Y <= zero_band**2``) and stays exactly 0.  The returned values are
    ``Y`` itself, which may dip slightly below 0 for ``delta > 0``.
    """
    if y0 < 0:
        raise DomainError("y0 must be non-negative")
    absorb = delta <= 0
    return _run(lambda idx: _besq_block(float(y0), float(delta), cfg, idx, absorb), cfg, reduce)


def _bessel_from_besq_block(z0, delta, cfg, idx):
    y, absorbed = _besq_block(z0 * z0, delta, cfg, idx, delta <= 0)
    return np.sqrt(np.maximum(y, 0.0)), absorbed


def simulate_bessel_from_besq(z0, delta, cfg, reduce=None):
    """``BES^delta(z0)`` as the square root of the squared-Bessel Euler path."""
    if not delta > 0:
        raise DomainError("simulate_bessel_from_besq needs delta > 0")
    if z0 < 0:
        raise DomainError("z0 must be non-negative")
    return _run(lambda idx: _bessel_from_besq_block(float(z0), float(delta), cfg, idx), cfg, reduce)


# ---------------------------------------------------------------------------
# random time change


def _clock_parts(spec, two_sided):
    """(q, p, c_pos^2, c_neg^2): R(b) = c_sign |b|^q and (R')^2 = c^2 q^2 |b|^p."""
    d = spec.delta
    q = 1.0 / (2.0 - d)
    p = 2.0 * (q - 1.0)
    if two_sided:
        cp = (0.5 * (1.0 + spec.theta)) ** q
        cn = (0.5 * (1.0 - spec.theta)) ** q
    else:
        cp = cn = 1.0
    return q, p, cp * cp * q * q, cn * cn * q * q


def _clock_increments(path, h, p, kpos, kneg, rule="exact", clamp=1e-9):
    """Clock increments along sampled Brownian rows ``path[..., k]``.

    ``exact`` integrates ``k_sign |b|^p`` along the straight line between
    consecutive samples (through zero if the step crosses it); it is finite
    for every ``p > -1``.  ``midpoint`` evaluates the integrand at the mean of the
    two samples with ``|b|`` floored at ``clamp``.
    """
    b0, b1 = path[..., :-1], path[..., 1:]
    if rule == "midpoint":
        m = 0.5 * (b0 + b1)
        k = np.where(m >= 0, kpos, kneg)
        return h * k * np.maximum(np.abs(m), clamp) ** p
    if rule != "exact":
        raise ValueError(f"unknown clock rule {rule!r}")
    # G(u) = k(u) sign(u) |u|^(p+1) / (p+1) is an antiderivative of k(u)|u|^p,
    # continuous through 0, so the line integral is h * dG / db, crossings included
    e = p + 1.0
    mag = np.abs(path)
    g = mag if e == 1.0 else mag ** e
    g *= np.where(path >= 0, kpos / e, -kneg / e)
    db = np.diff(path, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.diff(g, axis=-1) / db
    # nearly flat steps: the difference quotient cancels, use the midpoint value
    a, b = mag[..., :-1], mag[..., 1:]
    flat = (np.abs(db) <= 1e-7 * (a + b)) & (b0 * b1 >= 0)
    if flat.any():
        kk = np.where(b0 >= 0, kpos, kneg)
        out[flat] = kk[flat] * (0.5 * (a[flat] + b[flat])) ** p
    return h * out


def build_clock(beta, spec, two_sided=True, rule="exact", clamp=None):
    """Clock table for a single Brownian path sampled on a uniform grid.

    Parameters
    ----------
    beta : PathGrid
        One path (the first row is used).
    spec : SkewSpec
        ``0 < delta < 2``.
    two_sided : bool
        Integrate ``(R'_{delta,theta}(beta))^2`` (skew) instead of
        ``(R'_delta(|beta|))^2`` (plain).
    rule : {"exact", "midpoint"}
        Quadrature on each Brownian step; see :func:`_clock_increments`.
    """
    if not 0.0 < spec.delta < 2.0:
        raise DomainError("the time change needs 0 < delta < 2")
    if two_sided and abs(spec.theta) == 1.0:
        raise DomainError("theta = +-1 uses the glued one-sided construction")
    s = beta.times
    h = np.diff(s)
    b = beta.values[0]
    _, p, kp, kn = _clock_parts(spec, two_sided)
    if clamp is None:
        clamp = 1e-9 * max(1.0, abs(b[0]))
    inc = _clock_increments(b, h, p, kp, kn, rule=rule, clamp=clamp)
    return ClockTable(s, np.concatenate([[0.0], np.cumsum(inc)]))


def _brownian_step(z0, spec, two_sided, cfg):
    """Brownian grid step giving roughly ``steps`` clock steps per horizon on the fast side."""
    d, T = spec.delta, cfg.horizon
    scale = max(abs(z0), math.sqrt(T))
    kappa = (0.5 * (1.0 + abs(spec.theta))) ** 2 if two_sided else 1.0
    return T * (2.0 - d) ** 2 * scale ** (2.0 * (1.0 - d)) / (kappa * cfg.steps)


def _timechange_block(z0, spec, cfg, idx, rule="exact", brownian_step=None):
    d, theta = spec.delta, spec.theta
    two_sided = abs(theta) < 1.0
    q, p, kp, kn = _clock_parts(spec, two_sided)
    T, n = cfg.horizon, cfg.steps
    if two_sided:
        cpos, cneg = (0.5 * (1.0 + theta)) ** q, (0.5 * (1.0 - theta)) ** q
        b0 = (2.0 / (1.0 + theta) if z0 >= 0 else -2.0 / (1.0 - theta)) * abs(z0) ** (2.0 - d)
    else:
        b0 = abs(z0) ** (2.0 - d)
    h = brownian_step or _brownian_step(z0, spec, two_sided, cfg)
    sqh = math.sqrt(h)
    clamp = cfg.band(z0)

    b = idx.size
    gens = [path_rng(cfg.seed, i, INCREMENTS) for i in idx]
    seg_beta = [[np.array([b0])] for _ in range(b)]
    seg_tau = [[np.array([0.0])] for _ in range(b)]
    last_b = np.full(b, b0)
    last_tau = np.zeros(b)
    active = np.arange(b)
    rounds = 0
    while active.size:
        if rounds >= cfg.max_extensions:
            raise ResourceError(
                f"clock reached only {last_tau[active].min():.4g} < {T} after "
                f"{rounds} extensions of {n} Brownian steps",
                attained=float(last_tau[active].min()),
            )
        dbeta = np.stack([gens[j].standard_normal(n) for j in active]) * sqh
        beta = last_b[active, None] + np.cumsum(dbeta, axis=1)
        full = np.concatenate([last_b[active, None], beta], axis=1)
        inc = _clock_increments(full, h, p, kp, kn, rule=rule, clamp=clamp)
        tau = last_tau[active, None] + np.cumsum(inc, axis=1)
        for row, j in enumerate(active):
            seg_beta[j].append(beta[row])
            seg_tau[j].append(tau[row])
        last_b[active] = beta[:, -1]
        last_tau[active] = tau[:, -1]
        active = active[last_tau[active] < T]
        rounds += 1

    t = cfg.times
    out = np.empty((b, n + 1))
    for j in range(b):
        bb = np.concatenate(seg_beta[j])
        tt = np.concatenate(seg_tau[j])
        br = np.interp(t, tt, bb)
        if two_sided:
            out[j] = np.where(br >= 0, cpos, -cneg) * np.abs(br) ** q
        else:
            mag = np.abs(br) ** q
            out[j] = _glue_sign(z0, theta, bb, tt, t) * mag
    return out, np.full(b, -1, dtype=np.int64)


def _glue_sign(z0, theta, bb, tt, t):
    """Sign pattern of the one-sided (theta = +-1) process on the output grid."""
    home = 1.0 if theta > 0 else -1.0
    if z0 == 0 or np.sign(z0) == home:
        return np.full(t.shape, home)
    # start on the far side: flip to the home side at the first zero of beta
    neg = np.flatnonzero(bb <= 0)
    if neg.size == 0:
        return np.full(t.shape, -home)
    k = neg[0]
    frac = bb[k - 1] / (bb[k - 1] - bb[k])
    t_hit = tt[k - 1] + frac * (tt[k] - tt[k - 1])
    return np.where(t < t_hit, -home, home)


def simulate_time_changed(z0, spec, cfg, reduce=None, rule="exact", brownian_step=None):
    """(Skew) Bessel paths as ``R(beta_{r_t})`` for a Brownian motion ``beta``.

    For ``|theta| < 1`` the two-sided inverse scale function is used with
    ``beta`` started at ``S_{delta,theta}(z0)``.  For ``theta = +-1`` the plain
    construction ``R_delta(|beta|)`` is used and the sign is glued: a path
    starting on the far side keeps that sign until its first zero and the home
    side afterwards.  ``theta = 1`` with ``z0 >= 0`` is the ordinary Bessel
    process.

    The Brownian path is extended in blocks of ``cfg.steps`` steps until the
    clock passes the horizon, then inverted onto the output grid by linear
    interpolation.

    Raises
    ------
    ResourceError
        If the clock has not reached the horizon after ``cfg.max_extensions`` blocks.
    """
    if not 0.0 < spec.delta < 2.0:
        raise DomainError("the time-change construction needs 0 < delta < 2")
    return _run(lambda idx: _timechange_block(float(z0), spec, cfg, idx, rule, brownian_step),
                cfg, reduce)


# ---------------------------------------------------------------------------
# direct Euler for the drift SDE


def _direct_block(z0, spec, cfg, idx):
    d, theta = spec.delta, spec.theta
    n, dt = cfg.steps, cfg.dt
    b = idx.size
    dw = _normals(cfg.seed, idx, n) * math.sqrt(dt)
    # per path: one initial sign draw, then a bridge uniform and a sign uniform per step
    extra = np.stack([path_rng(cfg.seed, i, SIGNS).random(2 * n + 1) for i in idx])
    u0, ubridge, usign = extra[:, 0], extra[:, 1:n + 1], extra[:, n + 1:]
    p_plus = 0.5 * (1.0 + theta)
    one_sided = d >= 2.0
    eps_drift = math.sqrt(dt)

    m = np.full(b, abs(z0))
    s = np.where(u0 < p_plus, 1.0, -1.0) if z0 == 0 else np.full(b, math.copysign(1.0, z0))
    out = np.empty((b, n + 1))
    out[:, 0] = z0
    for k in range(n):
        c = m + (d - 1.0) / (2.0 * np.maximum(m, eps_drift)) * dt + dw[:, k]
        mag = np.abs(c)
        if not one_sided:
            # zero visited: endpoint sign change, or the Brownian bridge dipped below 0
            with np.errstate(over="ignore"):
                visit = (c < 0) | (ubridge[:, k] < np.exp(-2.0 * m * mag / dt))
            s = np.where(visit, np.where(usign[:, k] < p_plus, 1.0, -1.0), s)
        m = mag
        out[:, k + 1] = s * m
    return out, np.full(b, -1, dtype=np.int64)


def simulate_sde_direct(z0, spec, cfg, reduce=None):
    """Oracle-grade Euler scheme for the Bessel drift SDE.

    ``delta > 1``: ``Z + (delta-1)/(2 max(|Z|, sqrt(dt))) dt + dB`` on the
    modulus, reflected at 0.  ``delta = 1``: reflected Brownian motion.  For
    ``delta < 2`` a visit to zero inside a step (sign change of the candidate
    or a Brownian-bridge crossing) redraws the sign with ``P(+) = (1+theta)/2``;
    at ``delta = 1`` this is an exact skew Brownian motion sampler.  For
    ``delta >= 2`` the sign never changes.

    Raises
    ------
    UnsupportedError
        For ``delta < 1`` (the principal-value drift is not discretized).
    """
    if spec.delta < 1.0:
        raise UnsupportedError("direct SDE simulation needs delta >= 1; use the time change")
    return _run(lambda idx: _direct_block(float(z0), spec, cfg, idx), cfg, reduce)


# ---------------------------------------------------------------------------
# heterogeneous diffusion


def valid_constructions(delta, theta=0.0):
    """Constructions able to produce the (skew) Bessel part for ``delta``."""
    regime = classify_regime(delta)
    if regime is Regime.TRAP:
        return ("besq",)
    if regime is Regime.TRANSIENT:
        return ("besq", "direct")
    return ("timechange", "direct") if delta >= 1.0 else ("timechange",)


def _sign_draws(seed, idx, p_plus):
    u = np.array([path_rng(seed, i, SIGNS).random() for i in idx])
    return np.where(u < p_plus, 1.0, -1.0)


def _het_block(x0, params, theta, cfg, idx, construction):
    a, d = params.alpha, params.delta
    z0 = float(h_transform(x0, a))
    regime = classify_regime(d)
    if construction == "timechange":
        z, absorbed = _timechange_block(z0, SkewSpec(d, theta), cfg, idx)
    elif construction == "direct":
        z, absorbed = _direct_block(z0, SkewSpec(d, theta), cfg, idx)
    elif regime is Regime.TRAP:
        b = idx.size
        if z0 == 0:
            return np.zeros((b, cfg.steps + 1)), np.zeros(b, dtype=np.int64)
        mag, absorbed = _bessel_from_besq_block(abs(z0), d, cfg, idx)
        z = math.copysign(1.0, z0) * mag
    else:
        mag, absorbed = _bessel_from_besq_block(abs(z0), d, cfg, idx)
        if z0 == 0:
            sign = _sign_draws(cfg.seed, idx, 0.5 * (1.0 + theta))[:, None]
        else:
            sign = math.copysign(1.0, z0)
        z = sign * mag
    x = np.asarray(h_inverse(z, a))
    if regime is Regime.TRAP:
        x[np.abs(x) <= cfg.band(x0)] = 0.0
        x = np.where(np.arange(x.shape[1])[None, :] >= np.where(absorbed >= 0, absorbed, x.shape[1])[:, None],
                     0.0, x)
    return x, absorbed


def simulate_het(x0, params, theta, cfg, construction="auto", reduce=None):
    """Paths of ``dX = |X|^alpha dB + alpha lam |X|^(2alpha-1) sign(X) dt``.

    ``X = H^{-1}(Z)`` where ``Z`` is the skew Bessel process of dimension
    ``params.delta`` started at ``H(x0)``:

    * Trap (``delta <= 0``): squared-Bessel route, absorbed at the first
      zero-band entry, sign of ``x0``;
    * SkewRecurrent: time change (or direct Euler for ``delta >= 1``);
    * Transient: one-sided Bessel on the side of ``x0``; from ``x0 = 0`` the
      side is drawn once per path with ``P(+) = (1+theta)/2``.

    Parameters
    ----------
    construction : {"auto", "timechange", "besq", "direct"}
        ``auto`` picks the time change when ``0 < delta < 2`` and the
        squared-Bessel route otherwise.
    """
    if not isinstance(params, ModelParams):
        raise TypeError("params must be a ModelParams")
    if not -1.0 <= theta <= 1.0:
        raise DomainError("theta must lie in [-1, 1]")
    valid = valid_constructions(params.delta, theta)
    if construction == "auto":
        construction = valid[0]
    if construction not in valid:
        raise UnsupportedError(
            f"construction {construction!r} cannot simulate delta={params.delta:g}; "
            f"valid: {', '.join(valid)}"
        )
    return _run(lambda idx: _het_block(float(x0), params, float(theta), cfg, idx, construction),
                cfg, reduce)


def _het_direct_block(x0, params, cfg, idx):
    a, lam = params.alpha, params.lam
    n, dt = cfg.steps, cfg.dt
    b = idx.size
    dw = _normals(cfg.seed, idx, n) * math.sqrt(dt)
    band = cfg.band(x0)
    x = np.full(b, x0)
    out = np.empty((b, n + 1))
    out[:, 0] = x0
    absorbed = np.full(b, -1, dtype=np.int64)
    alive = np.ones(b, dtype=bool)
    s0 = math.copysign(1.0, x0)
    for k in range(n):
        ax = np.abs(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            drift = a * lam * np.where(ax > 0, ax ** (2.0 * a - 1.0), 0.0) * np.sign(x)
        x = x + drift * dt + ax ** a * dw[:, k]
        hit = alive & ((np.sign(x) != s0) | (np.abs(x) <= band))
        if hit.any():
            absorbed[hit] = k + 1
            alive &= ~hit
        x[~alive] = 0.0
        out[:, k + 1] = x
    return out, absorbed


def simulate_het_direct(x0, params, cfg, reduce=None):
    """Euler scheme for the heterogeneous SDE, stopped at the first zero-band entry.

    Only meaningful up to the first hitting time of 0; after it the path is
    held at 0 and ``absorbed_at`` records the step.  Intended as a
    cross-check on paths that survive the horizon.
    """
    if x0 == 0:
        raise DomainError("simulate_het_direct needs x0 != 0")
    return _run(lambda idx: _het_direct_block(float(x0), params, cfg, idx), cfg, reduce)

"""Parameter algebra: the power-law transform, the dimension map, regimes, and
scale/speed functions of plain and skew Bessel processes.

All functions accept scalars or numpy arrays for the spatial argument.  Powers
of negative numbers are always taken as ``sign(x) * |x| ** p``.
"""

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "ModelParams",
    "SkewSpec",
    "Regime",
    "dimension",
    "classify_regime",
    "h_transform",
    "h_inverse",
    "scale_S",
    "speed_m",
    "scale_S_skew",
    "speed_m_skew",
    "r_inverse",
    "r_inverse_skew",
]


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


class Regime(enum.Enum):
    """Behaviour at the origin, determined by the Bessel dimension."""

    TRAP = "Trap"
    SKEW_RECURRENT = "SkewRecurrent"
    TRANSIENT = "Transient"

    @property
    def behaviour(self):
        return _BEHAVIOUR[self]


_BEHAVIOUR = {
    Regime.TRAP: "hits zero with probability one and is absorbed there",
    Regime.SKEW_RECURRENT: (
        "visits zero infinitely often and leaves it to the positive side "
        "with probability (1+theta)/2"
    ),
    Regime.TRANSIENT: "never hits zero from x != 0; from 0 it leaves immediately and never returns",
}


def dimension(params_or_alpha, lam=None):
    """Bessel dimension ``(1 - 2 alpha (1 - lambda)) / (1 - alpha)``.

    Accepts a :class:`ModelParams` or the pair ``(alpha, lam)``.
    """
    if lam is None:
        return params_or_alpha.delta
    alpha = params_or_alpha
    return (1.0 - 2.0 * alpha * (1.0 - lam)) / (1.0 - alpha)


@dataclass(frozen=True)
class ModelParams:
    """Heterogeneity exponent ``alpha`` and interpretation parameter ``lam``.

    ``lam = 0`` is the Ito, ``1/2`` the Stratonovich and ``1`` the
    Haenggi-Klimontovich convention.  The dimension is computed once.
    """

    alpha: float
    lam: float
    delta: float = field(init=False)

    def __post_init__(self):
        a, lam = float(self.alpha), float(self.lam)
        if not 0.0 < a < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {a}")
        if not 0.0 <= lam <= 1.0:
            raise DomainError(f"lambda must lie in [0, 1], got {lam}")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "delta", dimension(a, lam))

    @property
    def nu(self):
        return self.delta / 2.0 - 1.0

    @property
    def regime(self):
        return classify_regime(self.delta)


@dataclass(frozen=True)
class SkewSpec:
    """Dimension ``delta`` and skewness ``theta`` of a (skew) Bessel law.

    For ``delta <= 0`` the skewness has no effect but is kept as given.
    """

    delta: float
    theta: float = 0.0

    def __post_init__(self):
        d, th = float(self.delta), float(self.theta)
        if not np.isfinite(d):
            raise DomainError("delta must be finite")
        if not -1.0 <= th <= 1.0:
            raise DomainError(f"theta must lie in [-1, 1], got {th}")
        object.__setattr__(self, "delta", d)
        object.__setattr__(self, "theta", th)

    @property
    def nu(self):
        return self.delta / 2.0 - 1.0

    @property
    def regime(self):
        return classify_regime(self.delta)


def classify_regime(delta):
    """Trap for ``delta <= 0``, SkewRecurrent for ``0 < delta < 2``, else Transient."""
    delta = float(delta)
    if not np.isfinite(delta):
        raise DomainError("delta must be finite")
    if delta <= 0.0:
        return Regime.TRAP
    if delta < 2.0:
        return Regime.SKEW_RECURRENT
    return Regime.TRANSIENT


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")


def h_transform(x, alpha):
    """Odd power map ``|x|^(1-alpha) sign(x) / (1-alpha)``."""
    _check_alpha(alpha)
    x = np.asarray(x, dtype=float)
    return _out(np.sign(x) * np.abs(x) ** (1.0 - alpha) / (1.0 - alpha))


def h_inverse(z, alpha):
    """Inverse of :func:`h_transform`: ``((1-alpha)|z|)^(1/(1-alpha)) sign(z)``."""
    _check_alpha(alpha)
    z = np.asarray(z, dtype=float)
    return _out(np.sign(z) * ((1.0 - alpha) * np.abs(z)) ** (1.0 / (1.0 - alpha)))


def scale_S(x, delta):
    """Scale function of the Bessel process on ``[0, inf)``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise DomainError("scale_S is defined for x >= 0")
    if delta >= 2.0 and np.any(x == 0):
        raise DomainError("scale_S is singular at 0 for delta >= 2")
    if delta < 2.0:
        out = x ** (2.0 - delta)
    elif delta == 2.0:
        out = 2.0 * np.log(x)
    else:
        out = -(x ** (2.0 - delta))
    return _out(out)


def speed_m(x, delta):
    """Speed-measure density of the Bessel process, ``x > 0``, ``delta > 0``."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise DomainError("speed_m requires x > 0")
    if delta <= 0:
        raise DomainError("speed_m requires delta > 0")
    if delta == 2.0:
        return _out(x.copy())
    return _out(2.0 / abs(2.0 - delta) * x ** (delta - 1.0))


def _check_skew(spec, allow_one_sided=False):
    if not 0.0 < spec.delta < 2.0:
        raise DomainError(f"skew scale/speed need 0 < delta < 2, got {spec.delta}")
    if not allow_one_sided and abs(spec.theta) == 1.0:
        raise DomainError("theta = +-1 has no two-sided scale function; use the glued construction")


def scale_S_skew(x, spec):
    """Two-sided scale function: ``2/(1+theta) x^(2-delta)`` for ``x >= 0`` and
    ``-2/(1-theta) |x|^(2-delta)`` below zero."""
    _check_skew(spec)
    x = np.asarray(x, dtype=float)
    p = 2.0 - spec.delta
    coef = np.where(x >= 0, 2.0 / (1.0 + spec.theta), 2.0 / (1.0 - spec.theta))
    return _out(np.sign(x) * coef * np.abs(x) ** p)


def speed_m_skew(x, spec):
    """Speed density ``(1 +- theta)/(2 - delta) |x|^(delta-1)`` on the two half-lines."""
    _check_skew(spec, allow_one_sided=True)
    x = np.asarray(x, dtype=float)
    if np.any(x == 0) and spec.delta < 1.0:
        raise DomainError("speed density is infinite at 0 for delta < 1")
    if np.any(x == 0):
        raise DomainError("speed density is not defined at x = 0")
    coef = np.where(x > 0, 1.0 + spec.theta, 1.0 - spec.theta) / (2.0 - spec.delta)
    return _out(coef * np.abs(x) ** (spec.delta - 1.0))


def r_inverse(z, delta):
    """Inverse of the Bessel scale function for ``0 < delta < 2``: ``z^(1/(2-delta))``."""
    if not 0.0 < delta < 2.0:
        raise DomainError("r_inverse needs 0 < delta < 2")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("r_inverse is defined for z >= 0")
    return _out(z ** (1.0 / (2.0 - delta)))


def r_inverse_skew(z, spec):
    """Inverse of :func:`scale_S_skew`."""
    _check_skew(spec)
    z = np.asarray(z, dtype=float)
    q = 1.0 / (2.0 - spec.delta)
    coef = np.where(z > 0, (1.0 + spec.theta) / 2.0, (1.0 - spec.theta) / 2.0) ** q
    return _out(np.sign(z) * coef * np.abs(z) ** q)

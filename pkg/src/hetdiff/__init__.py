"""Heterogeneous diffusions with power-law noise, simulated and checked through
(skew) Bessel processes."""

__version__ = "0.1.0"

from .errors import DomainError, NumericalError, ResourceError, UnsupportedError
from .model import (
    ModelParams,
    Regime,
    SkewSpec,
    classify_regime,
    dimension,
    h_inverse,
    h_transform,
)
from .densities import (
    DensityQuery,
    bessel_density,
    het_density,
    killed_density,
    skew_density,
    survival_probability,
)
from .simulate import (
    PathGrid,
    SimConfig,
    simulate_besq,
    simulate_bessel_from_besq,
    simulate_het,
    simulate_het_direct,
    simulate_sde_direct,
    simulate_time_changed,
)
from .verify import GofReport, run_suite

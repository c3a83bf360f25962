"""Checking simulated laws against the closed forms.

Each check returns a GofReport: a statistic, a threshold, and a verdict.
This demo runs a Kolmogorov-Smirnov test of simulated terminal values against
the exact CDF, an exit-probability check against the scale function, and the
skewness estimate.  Ensembles are smaller than in the acceptance suite.

Run:  python demos/04_verification.py   (a few seconds)
"""

import math

from hetdiff.densities import het_cdf
from hetdiff.model import ModelParams, SkewSpec
from hetdiff.simulate import SimConfig, simulate_het, simulate_time_changed
from hetdiff.verify import (
    ExitQuery,
    GofReport,
    estimate_exit_probability,
    estimate_skewness,
    exit_probability_theoretical,
    ks_statistic,
)

N = 4000
params, theta, x0 = ModelParams(0.5, 0.5), 0.5, 1.0
cfg = SimConfig(steps=2048, paths=N, seed=11)

terminal = simulate_het(x0, params, theta, cfg, reduce=lambda t, v, ab: v[:, -1])
cdf = het_cdf(1.0, x0, params, theta)
d = ks_statistic(terminal, cdf)
report = GofReport("ks_het_demo", d, 1.6276 / math.sqrt(N), N, seed=cfg.seed,
                   details={"alpha": 0.5, "lam": 0.5, "theta": theta})
print(report.to_json())

spec = SkewSpec(1.0, 0.5)
q = ExitQuery(-1.0, 1.0, 0.0)
print(f"\nexact P(exit at +1 from 0) = {exit_probability_theoretical(q, spec):.4f}")
rep = estimate_exit_probability(q, spec, SimConfig(horizon=5.0, steps=2048, paths=N, seed=12))
print(f"estimate {rep.details['estimate']:.4f}, |error| {rep.statistic:.4f} <= {rep.threshold:.4f}: "
      f"{'pass' if rep.passed else 'fail'}")

grid = simulate_time_changed(0.0, SkewSpec(1.3, 0.5), SimConfig(steps=1024, paths=N, seed=13))
print(f"\nskewness estimate {estimate_skewness(grid):.4f} (target 0.5)")

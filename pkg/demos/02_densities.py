"""Closed-form transition densities and what they say about the origin.

Three things are shown:

1. every density integrates to one with the built-in adaptive quadrature;
2. the skew Bessel law splits the mass that has visited 0 in the ratio
   (1 + theta) : (1 - theta), while the killed part stays on the starting side;
3. in the trap regime the missing mass is the atom at 0, equal to the
   probability of having been absorbed.

Run:  python demos/02_densities.py
"""

import math

from hetdiff.densities import (
    bessel_density,
    het_density,
    killed_density,
    skew_density,
    survival_probability,
)
from hetdiff.model import ModelParams, h_transform
from hetdiff.quadrature import integrate

INF = math.inf
t, x = 1.0, 0.5

print("normalization at t=1, x=0.5")
for d in (0.7, 1.5, 3.0):
    m = integrate(lambda y: bessel_density(t, x, y, d), 0.0, INF, points=[x])
    print(f"  Bessel delta={d}:            {m:.12f}")
m = integrate(lambda y: skew_density(t, x, y, 1.3, 0.4), -INF, INF, points=[0.0, x])
print(f"  skew Bessel delta=1.3, theta=0.4: {m:.12f}")

# Mass on the far side comes only from paths that visited 0.
d, th = 1.3, 0.4
left = integrate(lambda y: skew_density(t, x, y, d, th), -INF, 0.0)
killed = integrate(lambda y: killed_density(t, x, y, d), 0.0, INF, points=[x])
visited = 1.0 - killed
print(f"\nskew split, delta={d}, theta={th}")
print(f"  P(no visit to 0 by t)       = {killed:.6f}")
print(f"  P(Z_t < 0)                  = {left:.6f}")
print(f"  (1 - theta)/2 * P(visited)  = {(1 - th) / 2 * visited:.6f}")

# Far-side tails are tiny but still evaluated to full relative precision.
for y in (-1.0, -2.0, -3.0):
    print(f"  p(t=0.25, 2 -> {y}) = {skew_density(0.25, 2.0, y, d, th):.6e}")

# Trap regime: alpha=0.6 with the Ito convention gives delta < 0.
p = ModelParams(0.6, 0.0)
x0 = 1.0
cont = integrate(lambda y: het_density(t, x0, y, p), 0.0, INF, points=[x0])
surv = survival_probability(t, float(h_transform(x0, p.alpha)), p.delta)
print(f"\ntrap regime, delta={p.delta:.2f}, x0={x0}")
print(f"  mass of the continuous part  = {cont:.8f}")
print(f"  survival probability         = {surv:.8f}")
print(f"  atom at 0                    = {1 - cont:.8f}")

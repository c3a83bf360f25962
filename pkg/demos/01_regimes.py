"""How the noise exponent and the interpretation parameter fix the behaviour at 0.

The diffusion dX = |X|^alpha dB + alpha*lam*|X|^(2 alpha - 1) sign(X) dt becomes
a Bessel-type process Z = H(X) = sign(X)|X|^(1-alpha)/(1-alpha) of dimension

    delta = (1 - 2 alpha (1 - lam)) / (1 - alpha).

The dimension alone says whether the origin traps, reflects with a skew, or
repels.  Run:  python demos/01_regimes.py
"""

import numpy as np

from hetdiff.model import ModelParams, h_inverse, h_transform

CONVENTIONS = {"Ito": 0.0, "Stratonovich": 0.5, "Haenggi-Klimontovich": 1.0}

print("alpha  convention             delta    regime")
for alpha in (0.25, 0.5, 0.75):
    for name, lam in CONVENTIONS.items():
        p = ModelParams(alpha, lam)
        print(f"{alpha:5.2f}  {name:20s} {p.delta:7.3f}    {p.regime.value}")
    print()

# The same noise can therefore trap, recur or escape depending only on lam.
for lam in CONVENTIONS.values():
    p = ModelParams(0.5, lam)
    print(f"alpha=0.5, lam={lam}: {p.regime.value} -> {p.regime.behaviour}")

# The power map and its inverse are odd and mutually inverse.
x = np.array([-2.0, -0.1, 0.0, 0.3, 4.0])
z = h_transform(x, 0.5)
print("\nx          ", x)
print("H(x)       ", np.round(z, 4))
print("H^-1(H(x)) ", h_inverse(z, 0.5))

"""
Dispersion of the coupled plate
===============================

Plane waves split into a fast and a slow branch around the bare plate
branch w = k^2 / sqrt(alpha).  The displacement and flux amplitudes stay
equal in modulus and a quarter period apart.
"""

import numpy as np

from pemplate.analysis import dispersion, normalized_phase_speeds

alpha, beta = 1.0, 0.3
k = np.geomspace(0.5, 20, 6)
d = dispersion(k, alpha, beta)

print("     k     w_fast     w_slow    w_plate")
for row in zip(k, d.omega_fast, d.omega_slow, k**2 / np.sqrt(alpha)):
    print("".join(f"{v:10.4f} " for v in row))

# w / k^2 does not depend on k
print("w/k^2 on both branches:", normalized_phase_speeds(alpha, beta))
print("A/B fast:", d.amp_ratio_fast[0], " slow:", d.amp_ratio_slow[0])
print("product identity residual:", np.abs(d.omega_fast * d.omega_slow - k**4 / alpha).max())

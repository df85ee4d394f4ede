"""
Tuning the shunt resistance
===========================

A resistor in series with each node capacitor dissipates energy.  Too
small or too large a resistance does little; in between the two poles of
a mode coalesce and the slowest decay is fastest.
"""

import numpy as np

from pemplate.analysis import Mode, decay_rate, optimize_resistance
from pemplate.params import ALUMINIUM, REFERENCE_ACTUATOR, derive_circuit_values

groups = derive_circuit_values(ALUMINIUM, REFERENCE_ACTUATOR, 0.1, actuator_capacitance=True)
mode = Mode(1, 1)

for R in np.geomspace(1e4, 1e11, 8):
    print(f"R = {R:9.2e} ohm   slowest pole {decay_rate(mode, groups, R):+.3e}")

opt = optimize_resistance(mode, groups, (1e2, 1e14))
print(f"\nR* = {opt.R_star:.4e} ohm, gamma* = {opt.gamma_star:.4e}, rate {opt.decay_rate_star:.4e}")
print("interior optimum:", opt.interior)

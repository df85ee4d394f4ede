"""
Energy exchange in one plate mode
=================================

With weak coupling the two branches beat: a purely mechanical start hands
its energy to the circuit after half a beat period pi/g and takes it back.
"""

import math

import numpy as np

from pemplate.analysis import Mode, mode_evolution
from pemplate.pem import PEMParams

mode = Mode(1, 1)
params = PEMParams(alpha=1.0, beta=0.01)
g = params.beta * mode.k2() / params.alpha

traj = mode_evolution(mode, params, [1, 0, 0, 0], (0, 2 * math.pi / g), 8001)
frac = traj.electrical / traj.total
i = int(np.argmax(frac))
print(f"beat half-period pi/g = {math.pi / g:.3f}")
print(f"max electrical fraction {frac[i]:.5f} at t = {traj.t[i]:.3f}")
print(f"energy drift {np.abs(traj.total - traj.total[0]).max() / traj.total[0]:.1e}")

for t, f in zip(traj.t[::800], frac[::800]):
    print(f"t = {t:8.3f}  electrical {f:6.3f}  " + "#" * int(40 * f))

"""
Full-grid simulation of the aluminium plate
===========================================

Start from a (1, 1) deflection of one per cent of the edge, integrate the
coupled grid equations with implicit midpoint, and compare the lossless
and the optimally damped runs.
"""

import math

import numpy as np

from pemplate.analysis import Mode, optimize_resistance
from pemplate.fd import BoundaryCondition, GridSpec
from pemplate.params import ALUMINIUM, REFERENCE_ACTUATOR, derive_circuit_values
from pemplate.pem import PEMParams, PEMState, assemble_pem_system, integrate

grid = GridSpec(9)
mode = Mode(1, 1)
groups = derive_circuit_values(ALUMINIUM, REFERENCE_ACTUATOR, grid.eps, actuator_capacitance=True)
gamma = optimize_resistance(mode, groups, (1e2, 1e14)).gamma_star

u0 = 0.01 * mode.shape(grid) / 2  # shape peaks at 2
period = 2 * math.pi / (mode.k2(grid) / math.sqrt(groups.alpha))
g = groups.beta * mode.k2(grid) / groups.alpha
dt = period / 20
steps = 20 * math.ceil(math.pi / g / period)  # half a beat

for label, damping in (("lossless", 0.0), ("optimal R", gamma)):
    system = assemble_pem_system(grid, BoundaryCondition.SIMPLY_SUPPORTED,
                                 PEMParams(groups.alpha, groups.beta, damping))
    traj = integrate(system, PEMState.mechanical(u0), dt, steps, sample_every=steps // 8)
    E = traj.energies()
    total = E.sum(axis=1)
    print(f"\n{label}")
    for t, (mech, elec), tot in zip(traj.t, E, total):
        print(f"  t = {t:8.2f}  mechanical {mech / total[0]:.3f}  electrical {elec / total[0]:.3f}")
    print(f"  peak actuator voltage {groups.v0 * np.abs(traj.psi_dot).max():.2f} V (sampled)")

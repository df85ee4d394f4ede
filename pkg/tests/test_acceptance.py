"""Acceptance criteria, one test each, with the stated tolerances and runtime bounds.

Every test logs a single PASS/FAIL line that is echoed in the terminal summary.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from pemplate.analysis import Mode, decay_rate, dispersion, mode_evolution, mode_matrix, optimize_resistance
from pemplate.circuit import build_netlist, identify_edge_admittances, verify_analog
from pemplate.cli import main
from pemplate.fd import BoundaryCondition, GridSpec, assemble_biharmonic, estimate_convergence_order
from pemplate.params import ALUMINIUM, REFERENCE_ACTUATOR, ActuatorParams, derive_circuit_values, derive_gamma
from pemplate.pem import PEMParams, PEMState, assemble_pem_system, integrate

SS = BoundaryCondition.SIMPLY_SUPPORTED
CL = BoundaryCondition.CLAMPED
CONFIG = Path(__file__).resolve().parents[1] / "configs" / "aluminium.toml"


def report(log, name, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
    print(line)
    log(name, passed, detail)


@pytest.fixture(scope="module")
def aluminium():
    return derive_circuit_values(ALUMINIUM, REFERENCE_ACTUATOR, 0.1, actuator_capacitance=True)


def test_analog_equivalence(acceptance_log):
    rng = np.random.default_rng(20240901)
    start = time.perf_counter()
    worst = 0.0
    for n in range(5, 11):
        grid = GridSpec(n)
        operators = {bc: assemble_biharmonic(grid, bc) for bc in (SS, CL)}
        for _ in range(20):
            alpha = 10 ** rng.uniform(-3, 3)
            R0 = 10 ** rng.uniform(-2, 8)
            t0 = 10 ** rng.uniform(-3, 2)
            bc = (SS, CL)[rng.integers(2)]
            values = identify_edge_admittances(grid.eps, alpha, R0, t0)
            rep = verify_analog(build_netlist(values, grid, bc), operators[bc], alpha)
            worst = max(worst, rep.max_mismatch)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and elapsed < 5
    report(acceptance_log, "1 analog equivalence", ok,
           f"120 netlists, max mismatch {worst:.2e} (<= 1e-12), {elapsed:.2f} s (< 5 s)")
    assert ok


def test_stencil_correctness(acceptance_log):
    start = time.perf_counter()
    exact_ok = True
    for n in (7, 15, 31, 63):
        grid = GridSpec(n)
        r = assemble_biharmonic(grid, SS) @ grid.sample(lambda x, y: x**4)
        exact_ok &= bool(np.all(r[grid.depth() >= 3] == 24.0))
    study = estimate_convergence_order(
        lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y),
        lambda x, y: 4 * np.pi**4 * np.sin(np.pi * x) * np.sin(np.pi * y),
        SS, ns=(7, 15, 31, 63),
    )
    elapsed = time.perf_counter() - start
    ok = exact_ok and 1.9 <= study.order <= 2.1 and elapsed < 5
    report(acceptance_log, "2 stencil correctness", ok,
           f"x^4 -> 24 exactly: {exact_ok}; order {study.order:.4f} over eps 1/8..1/64; {elapsed:.2f} s")
    assert ok


def _triples():
    a, b, k = np.meshgrid(np.geomspace(1e-2, 1e2, 10), np.geomspace(1e-4, 1e2, 10),
                          np.geomspace(1e-1, 1e2, 10), indexing="ij")
    return a.ravel(), b.ravel(), k.ravel()


def test_dispersion_identities(acceptance_log):
    a, b, k = _triples()
    start = time.perf_counter()
    d = dispersion(k, a, b)
    k4a = k**4 / a
    prod = np.abs(d.omega_fast * d.omega_slow - k4a) / k4a
    split = b * k**2 / a
    diff = np.abs(d.omega_fast - d.omega_slow - split) / np.maximum(d.omega_fast, split)
    plate = k**2 / np.sqrt(a)
    bracket = bool(np.all((d.omega_slow < plate) & (plate < d.omega_fast)))
    elapsed = time.perf_counter() - start
    ok = prod.max() <= 1e-10 and diff.max() <= 1e-10 and bracket and elapsed < 1
    report(acceptance_log, "3 dispersion identities", ok,
           f"{a.size} triples, product {prod.max():.1e}, difference {diff.max():.1e}, "
           f"bracketing {bracket}, {elapsed * 1e3:.1f} ms")
    assert ok


def test_amplitude_relation(acceptance_log):
    a, b, k = _triples()
    d = dispersion(k, a, b)
    worst_mod = worst_phase = 0.0
    for w, sign, ratio in ((d.omega_fast, -1, d.amp_ratio_fast), (d.omega_slow, 1, d.amp_ratio_slow)):
        # null vector of the plane-wave matrix at the computed frequency,
        # scaled by the coupling so every entry is O(1)
        c = b * k**2 * w
        detuning = (k**4 - a * w**2) / c
        M = np.empty((a.size, 2, 2), complex)
        M[:, 0, 0] = detuning
        M[:, 0, 1] = -1j
        M[:, 1, 0] = 1j
        M[:, 1, 1] = detuning
        _, _, vh = np.linalg.svd(M)
        null = vh[:, -1, :].conj()
        r = null[:, 0] / null[:, 1]
        for z in (r, ratio):
            worst_mod = max(worst_mod, np.abs(np.abs(z) - 1).max())
            worst_phase = max(worst_phase, np.abs(np.angle(z) - sign * np.pi / 2).max())
        assert np.allclose(r, ratio, atol=1e-10)
    ok = worst_mod <= 1e-10 and worst_phase <= 1e-10
    report(acceptance_log, "4 amplitude relation", ok,
           f"|A/B| - 1 max {worst_mod:.1e}, phase error max {worst_phase:.1e} (fast -pi/2, slow +pi/2)")
    assert ok


def test_energy_exchange(acceptance_log):
    start = time.perf_counter()
    mode = Mode(1, 1)
    alpha = 1.0
    beta = 0.01  # g / w0 = beta / sqrt(alpha)
    g = beta * mode.k2() / alpha
    traj = mode_evolution(mode, PEMParams(alpha, beta), [1, 0, 0, 0], (0, math.pi / g), 20001)
    frac = float((traj.electrical / traj.total).max())
    closed_drift = float(np.abs(traj.total - traj.total[0]).max() / traj.total[0])

    grid = GridSpec(8)
    system = assemble_pem_system(grid, SS, PEMParams(1.0, 0.01))
    B = system.biharmonic.matrix
    N, wgt = grid.size, grid.eps**2
    energies = np.empty(10_001)

    def observe(k, z):
        u, ud, p, pd = z[:N], z[N:2 * N], z[2 * N:3 * N], z[3 * N:]
        energies[k] = 0.5 * wgt * (ud @ ud + u @ (B @ u) + pd @ pd + p @ (B @ p))

    u0 = 0.01 * mode.shape(grid)
    dt = 2 * math.pi / mode.k2(grid) / 40
    integrate(system, PEMState.mechanical(u0), dt, 10_000, sample_every=10_000, observer=observe)
    grid_drift = float(np.abs(energies - energies[0]).max() / energies[0])
    elapsed = time.perf_counter() - start
    ok = frac >= 0.99 and closed_drift <= 1e-12 and grid_drift <= 1e-10 and elapsed < 30
    report(acceptance_log, "5 energy exchange", ok,
           f"electrical fraction {frac:.6f} within pi/g; drift closed form {closed_drift:.1e}, "
           f"full grid n=8 10^4 steps {grid_drift:.1e}; {elapsed:.1f} s")
    assert ok


def test_damped_optimum(acceptance_log, aluminium):
    start = time.perf_counter()
    mode = Mode(1, 1)
    opt = optimize_resistance(mode, aluminium, (1e2, 1e14))
    half = decay_rate(mode, aluminium, 0.5 * opt.R_star)
    double = decay_rate(mode, aluminium, 2.0 * opt.R_star)
    better = opt.decay_rate_star < half and opt.decay_rate_star < double

    grid = GridSpec(9)
    params = PEMParams(aluminium.alpha, aluminium.beta, opt.gamma_star)
    system = assemble_pem_system(grid, SS, params)
    B = system.biharmonic.matrix
    N, wgt, a = grid.size, grid.eps**2, params.alpha
    steps = 20_000
    energies = np.empty(steps + 1)

    def observe(k, z):
        u, ud, p, pd = z[:N], z[N:2 * N], z[2 * N:3 * N], z[3 * N:]
        energies[k] = 0.5 * wgt * (a * (ud @ ud) + u @ (B @ u) + a * (pd @ pd) + p @ (B @ p))

    dt = 2 * math.pi / (mode.k2(grid) / math.sqrt(a)) / 40
    integrate(system, PEMState.mechanical(0.01 * mode.shape(grid)), dt, steps,
              sample_every=steps, observer=observe)
    rise = float(max(np.diff(energies).max(), 0.0) / energies[0])
    monotone = rise <= 1e-13
    elapsed = time.perf_counter() - start
    ok = opt.interior and better and monotone and energies[-1] < energies[0] and elapsed < 30
    report(acceptance_log, "6 damped optimum", ok,
           f"R* = {opt.R_star:.4e} ohm interior={opt.interior}, rate {opt.decay_rate_star:.4e} vs "
           f"{half:.4e} (R*/2) and {double:.4e} (2R*); energy non-increasing over {steps} steps "
           f"(max relative rise {rise:.1e}); {elapsed:.1f} s")
    assert ok


def test_feasibility_band(acceptance_log, tmp_path):
    inductances = []
    for g_ee in np.geomspace(1e-7, 1e-5, 21):
        act = ActuatorParams(0.0, 0.0, REFERENCE_ACTUATOR.g_em, float(g_ee), 0.1)
        inductances.append(derive_circuit_values(ALUMINIUM, act, 0.1, actuator_capacitance=True).L)
    inductances = np.array(inductances)
    in_band = bool(np.all((inductances >= 0.1) & (inductances <= 1000)))
    few_henry = bool(np.any((inductances >= 1) & (inductances <= 10)))

    out = tmp_path / "simulate"
    code = main(["simulate", "--config", str(CONFIG), "--out", str(out)])
    summary = json.loads((out / "simulate_summary.json").read_text())
    manifest = json.loads((out / "manifest.json").read_text())
    peak = summary["peak_actuator_voltage_V"]
    marked = manifest.get("actuator_parameters", {}).get("g_ee") == REFERENCE_ACTUATOR.g_ee
    ok = in_band and few_henry and code == 0 and peak < 50 and marked
    report(acceptance_log, "7 feasibility band", ok,
           f"L in [{inductances.min():.3g}, {inductances.max():.3g}] H for g_ee 0.1-10 uF, "
           f"1-10 H sub-range {few_henry}; peak actuator voltage {peak:.2f} V (< 50 V), "
           f"actuator parameters in manifest {marked}")
    assert ok


def test_cross_module_consistency(acceptance_log, aluminium):
    grid = GridSpec(9)
    worst = 0.0
    for gamma in (0.0, derive_gamma(aluminium, 3.6e7), 0.5):
        params = PEMParams(aluminium.alpha, aluminium.beta, gamma)
        M = assemble_pem_system(grid, SS, params).matrix
        for mode in (Mode(1, 1), Mode(2, 1), Mode(3, 5), Mode(9, 9)):
            phi = mode.shape(grid) * grid.eps  # unit Euclidean norm
            P = np.kron(np.eye(4), phi[:, None])
            restricted = np.linalg.eigvals(P.T @ (M @ P))
            reference = np.linalg.eigvals(mode_matrix(mode.k2(grid), params))
            scale = np.abs(reference).max()
            for lam in reference:
                worst = max(worst, np.abs(restricted - lam).min() / scale)
    ok = worst <= 1e-12
    report(acceptance_log, "8 cross-module consistency", ok,
           f"per-mode vs restricted full-grid eigenvalues, max relative difference {worst:.1e}")
    assert ok

"""``pem`` command line: synth | dispersion | modal | simulate | optimize-r.

Each command reads a TOML config (see :mod:`pemplate.config`), writes its
outputs plus ``manifest.json`` into ``--out``, and exits 0 only if the
checks embedded in that command pass.  Outputs are byte-identical for
identical configs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .analysis import Mode, dispersion, mode_evolution, optimize_resistance, decay_rate
from .circuit import GICRealization, build_netlist, identify_edge_admittances, verify_analog, verify_gic
from .config import ConfigError, RunConfig, load_config
from .fd import assemble_biharmonic
from .params import DimensionlessGroups, ParameterError, derive_circuit_values, derive_gamma
from .pem import PEMParams, PEMState, assemble_pem_system, integrate

SYNTH_TOL = 1e-9
DISPERSION_TOL = 1e-10
MODAL_DRIFT_TOL = 1e-12
SIM_DRIFT_TOL = 1e-10
# floating-point slack when checking that the damped energy never increases
MONOTONE_SLACK = 1e-13


def _f(x: float) -> Any:
    x = float(x)
    return x if math.isfinite(x) else repr(x)


def _csv(header: list[str], columns: list[np.ndarray]) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def groups_for(cfg: RunConfig) -> DimensionlessGroups:
    R0 = cfg.section("circuit")["R0"]
    return derive_circuit_values(cfg.plate, cfg.actuator, cfg.grid.eps, R0,
                                 actuator_capacitance=R0 is None)


def _groups_dict(g: DimensionlessGroups) -> dict:
    return {k: _f(getattr(g, k)) if getattr(g, k) is not None else None
            for k in ("alpha", "beta", "gamma", "eps", "L", "C", "R0", "t0", "v0")}


def _manifest(cfg: RunConfig, command: str, groups: DimensionlessGroups, extra: dict) -> dict:
    return {
        "tool": "pemplate",
        "version": __version__,
        "command": command,
        "config_sha256": cfg.digest,
        "plate": {k: _f(getattr(cfg.plate, k)) for k in ("rho", "E", "h", "a", "l0", "t0")},
        "actuator_parameters": {k: _f(getattr(cfg.actuator, k)) for k in ("g_mm", "g_12", "g_em", "g_ee", "b")},
        "grid": {"n": cfg.grid.n, "eps": _f(cfg.grid.eps), "bc": cfg.bc.value},
        "groups": _groups_dict(groups),
        **extra,
    }


def _write(out: Path, files: dict[str, str], manifest: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    digests = {}
    for name, text in files.items():
        data = text.encode("utf-8")
        (out / name).write_bytes(data)
        digests[name] = hashlib.sha256(data).hexdigest()
    manifest = dict(manifest, outputs=digests)
    (out / "manifest.json").write_bytes(_json(manifest).encode("utf-8"))


def _mode(cfg: RunConfig, section: str) -> Mode:
    m, n = cfg.section(section)["mode"]
    return Mode(m, n)


# --------------------------------------------------------------------------

def cmd_synth(cfg: RunConfig, out: Path, expand_negatives: bool = False) -> int:
    groups = groups_for(cfg)
    values = identify_edge_admittances(groups.eps, groups.alpha, groups.R0, groups.t0)
    netlist = build_netlist(values, cfg.grid, cfg.bc)
    report = verify_analog(netlist, assemble_biharmonic(cfg.grid, cfg.bc), groups.alpha)
    ok = report.max_mismatch <= SYNTH_TOL
    result = {
        "max_mismatch": report.max_mismatch,
        "tolerance": SYNTH_TOL,
        "passed": ok,
        "elements": {"L_axial": values.L_axial, "L_diag": values.L_diag,
                     "L_second": values.L_second, "C_ground": values.C_ground},
        "components": len(netlist.components),
    }
    emitted = netlist
    if expand_negatives:
        emitted = build_netlist(values, cfg.grid, cfg.bc, expand_negatives=True)
        checks = {}
        for name, L in (("L_diag", values.L_diag), ("L_second", values.L_second)):
            z = verify_gic(GICRealization.for_inductance(L))
            rel = abs(z.inductance - L) / abs(L) if z.inductance is not None else math.inf
            checks[name] = {"target": L, "realized": z.inductance, "relative_error": _f(rel)}
            ok = ok and rel <= SYNTH_TOL
        result["gic"] = checks
        result["expanded_components"] = len(emitted.components)
        result["passed"] = ok
    _write(out, {"netlist.cir": emitted.to_text(), "synth_report.json": _json(result)},
           _manifest(cfg, "synth", groups, {"expand_negatives": expand_negatives}))
    return 0 if ok else 1


def cmd_dispersion(cfg: RunConfig, out: Path) -> int:
    groups = groups_for(cfg)
    sec = cfg.section("dispersion")
    alpha = sec["alpha"] if sec["alpha"] is not None else groups.alpha
    beta = sec["beta"] if sec["beta"] is not None else groups.beta
    if not (0 < sec["k_min"] <= sec["k_max"]) or sec["samples"] < 1:
        raise ConfigError(f"{cfg.where('dispersion')}: empty k-range")
    if sec["spacing"] == "log":
        k = np.geomspace(sec["k_min"], sec["k_max"], sec["samples"])
    else:
        k = np.linspace(sec["k_min"], sec["k_max"], sec["samples"])
    d = dispersion(k, alpha, beta)
    k4a = k**4 / alpha
    prod_res = np.abs(d.omega_fast * d.omega_slow - k4a) / k4a
    diff_ref = beta * k**2 / alpha
    diff_res = np.abs(d.omega_fast - d.omega_slow - diff_ref) / np.maximum(d.omega_fast, 1e-300)
    ok = bool(prod_res.max() <= DISPERSION_TOL and diff_res.max() <= DISPERSION_TOL)
    csv = _csv(
        ["k", "omega_fast", "omega_slow", "vp_fast", "vp_slow",
         "amp_ratio_fast_imag", "amp_ratio_slow_imag", "product_residual", "difference_residual"],
        [k, d.omega_fast, d.omega_slow, d.vp_fast, d.vp_slow,
         d.amp_ratio_fast.imag, d.amp_ratio_slow.imag, prod_res, diff_res],
    )
    summary = {"alpha": alpha, "beta": beta, "samples": int(k.size),
               "max_product_residual": float(prod_res.max()),
               "max_difference_residual": float(diff_res.max()),
               "tolerance": DISPERSION_TOL, "passed": ok}
    _write(out, {"dispersion.csv": csv, "dispersion_summary.json": _json(summary)},
           _manifest(cfg, "dispersion", groups, {}))
    return 0 if ok else 1


def _modal_params(cfg: RunConfig, groups: DimensionlessGroups, sec: dict) -> PEMParams:
    alpha = sec.get("alpha") if sec.get("alpha") is not None else groups.alpha
    beta = sec.get("beta") if sec.get("beta") is not None else groups.beta
    gamma = derive_gamma(groups, sec["R"]) if sec.get("R") is not None else 0.0
    return PEMParams(alpha, beta, gamma)


def cmd_modal(cfg: RunConfig, out: Path) -> int:
    groups = groups_for(cfg)
    sec = cfg.section("modal")
    mode = _mode(cfg, "modal")
    grid = cfg.grid if sec["wavenumber"] == "discrete" else None
    params = _modal_params(cfg, groups, sec)
    k2 = mode.k2(grid)
    w0 = k2 / math.sqrt(params.alpha)
    g = params.beta * k2 / params.alpha
    t_end = sec["t_end"] if sec["t_end"] is not None else (2 * math.pi / g if g > 0 else 20 * math.pi / w0)
    traj = mode_evolution(mode, params, sec["init"], (0.0, t_end), sec["samples"], grid)
    total = traj.total
    drift = float(np.abs(total - total[0]).max() / total[0]) if total[0] > 0 else 0.0
    summary: dict[str, Any] = {
        "mode": [mode.m, mode.n], "k2": k2, "omega0": w0, "g": g,
        "g_over_omega0": g / w0, "alpha": params.alpha, "beta": params.beta,
        "gamma": params.gamma, "decay_rate": traj.decay_rate, "method": traj.method,
        "relative_energy_drift": drift,
    }
    ok = True
    if g > 0:
        # one beat half-period, sampled finely enough to resolve the carrier
        half = math.pi / g
        fine = mode_evolution(mode, params, sec["init"], (0.0, half),
                              max(20001, int(40 * half * w0 / (2 * math.pi))), grid)
        frac = fine.mechanical / fine.total
        summary.update(beat_half_period=half,
                       min_mechanical_fraction_first_beat=float(frac.min()),
                       max_electrical_fraction_first_beat=float((fine.electrical / fine.total).max()))
    if params.gamma == 0:
        ok = drift <= MODAL_DRIFT_TOL
        summary["drift_tolerance"] = MODAL_DRIFT_TOL
    summary["passed"] = ok
    csv = _csv(["t", "p", "p_dot", "q", "q_dot", "mechanical", "electrical", "total"],
               [traj.t, traj.p, traj.p_dot, traj.q, traj.q_dot, traj.mechanical, traj.electrical, total])
    _write(out, {"modal.csv": csv, "modal_summary.json": _json(summary)},
           _manifest(cfg, "modal", groups, {"modal": {"samples": sec["samples"], "t_end": t_end,
                                                      "wavenumber": sec["wavenumber"]}}))
    return 0 if ok else 1


def run_simulation(cfg: RunConfig, groups: DimensionlessGroups, sec: dict) -> dict[str, Any]:
    """Full-grid run from a mode-shaped deflection; returns summary and sampled data."""
    grid, mode = cfg.grid, _mode(cfg, "simulate")
    params = PEMParams(groups.alpha, groups.beta,
                       derive_gamma(groups, sec["R"]) if sec["R"] is not None else 0.0)
    system = assemble_pem_system(grid, cfg.bc, params)
    x, y = grid.coords()
    amp = sec["amplitude"] * cfg.plate.a / cfg.plate.l0
    u0 = amp * np.sin(mode.m * math.pi * x) * np.sin(mode.n * math.pi * y)
    w0 = mode.k2(grid) / math.sqrt(params.alpha)
    period = 2 * math.pi / w0
    dt = period / sec["steps_per_period"]
    if sec["steps"] is not None:
        steps = sec["steps"]
    else:
        g = params.beta * mode.k2(grid) / params.alpha
        periods = sec["periods"] if sec["periods"] is not None else (
            math.ceil(math.pi / g / period) if g > 0 else 10)
        steps = int(round(periods * sec["steps_per_period"]))

    B = system.biharmonic.matrix
    N, w, a = grid.size, grid.eps**2, params.alpha
    energies = np.empty(steps + 1)
    peak = np.zeros(N)

    def observe(k, z):
        u, ud, p, pd = z[:N], z[N:2 * N], z[2 * N:3 * N], z[3 * N:]
        energies[k] = 0.5 * w * (a * (ud @ ud) + u @ (B @ u) + a * (pd @ pd) + p @ (B @ p))
        np.maximum(peak, np.abs(pd), out=peak)

    traj = integrate(system, PEMState.mechanical(u0), dt, steps, sec["sample_every"], observe)
    E0 = energies[0]
    increases = np.diff(energies)
    return {
        "traj": traj, "system": system, "dt": dt, "steps": steps,
        "energies": energies,
        "relative_energy_drift": float(np.abs(energies - E0).max() / E0),
        "max_relative_increase": float(max(increases.max(), 0.0) / E0) if steps else 0.0,
        "peak_psi_dot": float(peak.max()),
        "params": params,
    }


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    groups = groups_for(cfg)
    sec = cfg.section("simulate")
    run = run_simulation(cfg, groups, sec)
    traj, params = run["traj"], run["params"]
    peak_v = groups.v0 * run["peak_psi_dot"]
    summary: dict[str, Any] = {
        "dt": run["dt"], "steps": run["steps"], "integrator": "implicit_midpoint",
        "gamma": params.gamma, "R": sec["R"],
        "relative_energy_drift": run["relative_energy_drift"],
        "max_relative_energy_increase": run["max_relative_increase"],
        "peak_psi_dot": run["peak_psi_dot"],
        "v0": groups.v0, "peak_actuator_voltage_V": peak_v,
        "node_inductance_L_H": groups.L, "node_capacitance_C_F": groups.C,
    }
    if params.gamma == 0:
        ok = run["relative_energy_drift"] <= SIM_DRIFT_TOL
        summary["drift_tolerance"] = SIM_DRIFT_TOL
    else:
        ok = run["max_relative_increase"] <= MONOTONE_SLACK
        summary["monotone_slack"] = MONOTONE_SLACK
    summary["passed"] = ok
    E = traj.energies()
    probes = sec["probes"] or [[(cfg.grid.n + 1) // 2, (cfg.grid.n + 1) // 2]]
    header = ["t", "mechanical", "electrical", "total"]
    cols = [traj.t, E[:, 0], E[:, 1], E.sum(axis=1)]
    for i, j in probes:
        k = cfg.grid.index(i, j)
        header += [f"u_{i}_{j}", f"psi_dot_{i}_{j}"]
        cols += [traj.u[:, k], traj.psi_dot[:, k]]
    _write(out, {"simulate.csv": _csv(header, cols), "simulate_summary.json": _json(summary)},
           _manifest(cfg, "simulate", groups, {"integrator": {
               "scheme": "implicit_midpoint", "dt": run["dt"], "steps": run["steps"],
               "sample_every": sec["sample_every"], "mode": sec["mode"],
               "amplitude_fraction_of_edge": sec["amplitude"]}}))
    return 0 if ok else 1


def cmd_optimize_r(cfg: RunConfig, out: Path) -> int:
    groups = groups_for(cfg)
    sec = cfg.section("optimize")
    mode = _mode(cfg, "optimize")
    grid = cfg.grid if sec["wavenumber"] == "discrete" else None
    opt = optimize_resistance(mode, groups, (sec["R_min"], sec["R_max"]), grid)
    at = lambda R: decay_rate(mode, groups, R, grid)
    neighbours = {"half": at(0.5 * opt.R_star), "double": at(2 * opt.R_star)}
    ends = {"R_min": at(sec["R_min"]), "R_max": at(sec["R_max"])}
    better = all(opt.decay_rate_star < v for v in (*neighbours.values(), *ends.values()))
    ok = opt.interior and better
    report = {
        "mode": [mode.m, mode.n], "R_star": opt.R_star, "gamma_star": opt.gamma_star,
        "decay_rate_star": opt.decay_rate_star, "interior": opt.interior,
        "decay_rate_half_R_star": neighbours["half"], "decay_rate_double_R_star": neighbours["double"],
        "decay_rate_R_min": ends["R_min"], "decay_rate_R_max": ends["R_max"],
        "strictly_better": better, "passed": ok,
    }
    _write(out, {"optimize_r.json": _json(report)},
           _manifest(cfg, "optimize-r", groups, {"R_bounds": [sec["R_min"], sec["R_max"]],
                                                 "wavenumber": sec["wavenumber"]}))
    return 0 if ok else 1


COMMANDS = {
    "synth": cmd_synth,
    "dispersion": cmd_dispersion,
    "modal": cmd_modal,
    "simulate": cmd_simulate,
    "optimize-r": cmd_optimize_r,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(prog="pem", description="Circuit analog of a piezo-coupled plate: synthesis, analysis and simulation.")
    parser.add_argument("command", choices=list(COMMANDS))
    parser.add_argument("--config", required=True, type=Path)
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--expand-negatives", action="store_true",
                        help="replace negative inductors by GIC sub-circuits (synth only)")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "synth":
            return cmd_synth(cfg, args.out, args.expand_negatives)
        return COMMANDS[args.command](cfg, args.out)
    except (ConfigError, ParameterError, ValueError, OSError) as e:
        print(f"pem {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

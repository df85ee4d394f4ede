"""TOML run configuration.

Schema (every section optional except ``plate``, ``actuator`` and ``grid``)::

    [plate]        rho, E, h, a=1.0, l0=1.0, t0=<plate time scale>
    [actuator]     g_mm, g_12, g_em, g_ee, b
    [grid]         n, bc = "simply_supported" | "clamped"
    [circuit]      R0 (omit to use the patch capacitance g_ee as node capacitor)
    [dispersion]   k_min, k_max, samples=200, spacing="log", alpha, beta
    [modal]        mode=[1,1], samples=4001, t_end, init=[1,0,0,0], R,
                   wavenumber="continuous", alpha, beta
    [simulate]     mode=[1,1], amplitude=0.01, steps_per_period=40, periods,
                   steps, sample_every=50, R, probes=[[i,j], ...]
    [optimize]     mode=[1,1], R_min=1e2, R_max=1e14, wavenumber="continuous"

``t0`` defaults to ``sqrt(3 rho l0^4 / (h^2 E))``, which makes alpha = 1.
``alpha`` / ``beta`` in a command section override the derived groups.
``amplitude`` is the initial deflection as a fraction of the edge length.
Unknown sections or keys are rejected with the line they appear on.
"""

from __future__ import annotations

import hashlib
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .fd import BoundaryCondition, GridSpec
from .params import ActuatorParams, ParameterError, PlateParams


class ConfigError(ValueError):
    pass


REQ = object()
NUM = (int, float)

SCHEMA: dict[str, dict[str, tuple[Any, Any]]] = {
    "plate": {"rho": (NUM, REQ), "E": (NUM, REQ), "h": (NUM, REQ), "a": (NUM, 1.0),
              "l0": (NUM, 1.0), "t0": (NUM, None)},
    "actuator": {"g_mm": (NUM, REQ), "g_12": (NUM, REQ), "g_em": (NUM, REQ),
                 "g_ee": (NUM, REQ), "b": (NUM, REQ)},
    "grid": {"n": (int, REQ), "bc": (str, "simply_supported")},
    "circuit": {"R0": (NUM, None)},
    "dispersion": {"k_min": (NUM, 0.1), "k_max": (NUM, 100.0), "samples": (int, 200),
                   "spacing": (str, "log"), "alpha": (NUM, None), "beta": (NUM, None)},
    "modal": {"mode": (list, [1, 1]), "samples": (int, 4001), "t_end": (NUM, None),
              "init": (list, [1.0, 0.0, 0.0, 0.0]), "R": (NUM, None),
              "wavenumber": (str, "continuous"), "alpha": (NUM, None), "beta": (NUM, None)},
    "simulate": {"mode": (list, [1, 1]), "amplitude": (NUM, 0.01), "steps_per_period": (int, 40),
                 "periods": (NUM, None), "steps": (int, None), "sample_every": (int, 50),
                 "R": (NUM, None), "probes": (list, None)},
    "optimize": {"mode": (list, [1, 1]), "R_min": (NUM, 1e2), "R_max": (NUM, 1e14),
                 "wavenumber": (str, "continuous")},
}
REQUIRED_SECTIONS = ("plate", "actuator", "grid")


def _locate(text: str, section: str, key: Optional[str] = None) -> int:
    """Line number of ``[section]`` or of ``key`` inside it; 0 when not found."""
    current = None
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.strip()
        m = re.match(r"\[\s*([^\]]+?)\s*\]", stripped)
        if m:
            current = m.group(1)
            if current == section and key is None:
                return lineno
            continue
        if current == section and key is not None and re.match(rf"{re.escape(key)}\s*=", stripped):
            return lineno
    return 0


@dataclass
class RunConfig:
    plate: PlateParams
    actuator: ActuatorParams
    grid: GridSpec
    bc: BoundaryCondition
    sections: dict[str, dict[str, Any]]
    digest: str
    text: str = field(repr=False, default="")

    def section(self, name: str) -> dict[str, Any]:
        return self.sections[name]

    def where(self, section: str, key: Optional[str] = None) -> str:
        line = _locate(self.text, section, key)
        loc = f"[{section}]" + (f".{key}" if key else "")
        return f"line {line}: {loc}" if line else loc


def parse_config(text: str) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"invalid TOML: {e}") from None

    def fail(section, key, msg):
        line = _locate(text, section, key)
        loc = f"[{section}]" + (f".{key}" if key else "")
        prefix = f"line {line}: " if line else ""
        raise ConfigError(f"{prefix}{loc}: {msg}")

    for name in raw:
        if name not in SCHEMA:
            fail(name, None, f"unknown section (expected one of {', '.join(SCHEMA)})")
        if not isinstance(raw[name], dict):
            fail(name, None, "must be a table")
    for name in REQUIRED_SECTIONS:
        if name not in raw:
            raise ConfigError(f"missing required section [{name}]")

    sections: dict[str, dict[str, Any]] = {}
    for name, spec in SCHEMA.items():
        given = raw.get(name, {})
        for key in given:
            if key not in spec:
                fail(name, key, f"unknown key (expected one of {', '.join(spec)})")
        out = {}
        for key, (typ, default) in spec.items():
            if key not in given:
                if default is REQ:
                    fail(name, None, f"missing required key {key!r}")
                out[key] = default
                continue
            value = given[key]
            ok = isinstance(value, typ) and not isinstance(value, bool)
            if typ is int and isinstance(value, float):
                ok = False
            if not ok:
                fail(name, key, f"expected {getattr(typ, '__name__', 'number')}, got {value!r}")
            if isinstance(value, float) and not math.isfinite(value):
                fail(name, key, "must be finite")
            out[key] = float(value) if typ is NUM else value
        sections[name] = out

    p = sections["plate"]
    if p["t0"] is None:
        if p["rho"] > 0 and p["E"] > 0 and p["h"] > 0:
            p["t0"] = math.sqrt(3.0 * p["rho"] * p["l0"] ** 4 / (p["h"] ** 2 * p["E"]))
        else:
            p["t0"] = 1.0
    try:
        plate = PlateParams(**p)
    except ParameterError as e:
        fail("plate", None, str(e))
    try:
        actuator = ActuatorParams(**sections["actuator"])
    except ParameterError as e:
        fail("actuator", None, str(e))
    try:
        bc = BoundaryCondition.parse(sections["grid"]["bc"])
    except ValueError as e:
        fail("grid", "bc", str(e))
    if sections["grid"]["n"] < 5:
        fail("grid", "n", f"need at least 5 interior nodes per side, got {sections['grid']['n']}")
    grid = GridSpec(sections["grid"]["n"])

    for name in ("modal", "simulate", "optimize"):
        mode = sections[name]["mode"]
        if len(mode) != 2 or not all(isinstance(v, int) and v >= 1 for v in mode):
            fail(name, "mode", f"expected [m, n] with positive integers, got {mode!r}")
        if sections[name].get("wavenumber", "continuous") not in ("continuous", "discrete"):
            fail(name, "wavenumber", "expected 'continuous' or 'discrete'")
    if sections["dispersion"]["spacing"] not in ("log", "linear"):
        fail("dispersion", "spacing", "expected 'log' or 'linear'")
    init = sections["modal"]["init"]
    if len(init) != 4 or not all(isinstance(v, NUM) for v in init):
        fail("modal", "init", "expected four numbers [p, p_dot, q, q_dot]")
    probes = sections["simulate"]["probes"]
    if probes is not None:
        for pr in probes:
            if not (isinstance(pr, list) and len(pr) == 2 and all(isinstance(v, int) and 1 <= v <= grid.n for v in pr)):
                fail("simulate", "probes", f"probe {pr!r} is not an interior node [i, j] with 1 <= i, j <= {grid.n}")

    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return RunConfig(plate, actuator, grid, bc, sections, digest, text)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))

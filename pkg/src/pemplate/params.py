"""Physical inputs and the dimensionless groups derived from them.

All physical quantities are SI.  Simulation runs in the dimensionless system
where lengths are measured in ``l0``, times in ``t0`` and voltages in ``v0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional


class ParameterError(ValueError):
    """Raised when a physical or dimensionless parameter is out of its domain."""


def _require_positive(owner: str, **fields: float) -> None:
    for name, value in fields.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise ParameterError(f"{owner}.{name} must be a finite positive number, got {value!r}")


@dataclass(frozen=True)
class PlateParams:
    """Homogeneous thin plate.

    Attributes
    ----------
    rho : mass density [kg/m^3]
    E : Young modulus [Pa]
    h : thickness [m]
    a : edge length of the square plate [m]
    l0 : characteristic length [m]
    t0 : characteristic time [s]
    """

    rho: float
    E: float
    h: float
    a: float = 1.0
    l0: float = 1.0
    t0: float = 1.0

    def __post_init__(self):
        _require_positive("PlateParams", rho=self.rho, E=self.E, h=self.h,
                          a=self.a, l0=self.l0, t0=self.t0)
        if self.h / self.a >= 0.1:
            warnings.warn(
                f"h/a = {self.h / self.a:.3g} is outside the thin-plate regime (h/a < 0.1)",
                stacklevel=3,
            )


@dataclass(frozen=True)
class ActuatorParams:
    """Square piezoelectric patch of edge ``b`` bonded at a grid node.

    ``g_mm``, ``g_12``, ``g_em`` and ``g_ee`` are the entries of the
    constitutive matrix relating (curvatures, voltage) to (moments, charge).
    ``g_mm`` and ``g_12`` are kept for completeness; the coupled field
    equations neglect the patch bending stiffness.
    """

    g_mm: float
    g_12: float
    g_em: float
    g_ee: float
    b: float

    def __post_init__(self):
        _require_positive("ActuatorParams", g_ee=self.g_ee, b=self.b)
        for name in ("g_mm", "g_12", "g_em"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ParameterError(f"ActuatorParams.{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class DimensionlessGroups:
    """Scaling groups of the coupled plate/circuit system.

    ``L`` and ``C`` are the base inductance and node capacitance of the
    analog circuit; ``R0`` is the admittance scale and ``v0`` the voltage
    scale.  ``gamma`` is zero until a shunt resistance is chosen.
    """

    alpha: float
    beta: float
    eps: float
    L: float
    C: float
    R0: float
    t0: float
    v0: Optional[float] = None
    gamma: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha!r}")
        if not 0 < self.eps < 1:
            raise ParameterError(f"eps must lie in (0, 1), got {self.eps!r}")
        if not self.gamma >= 0:
            raise ParameterError(f"gamma must be non-negative, got {self.gamma!r}")
        lc = self.alpha * self.eps**4 * self.t0**2
        if abs(self.L * self.C - lc) > 1e-12 * lc:
            raise ParameterError(
                f"L*C = {self.L * self.C!r} violates the analogy product {lc!r}"
            )

    def with_resistance(self, R: float) -> "DimensionlessGroups":
        return replace(self, gamma=derive_gamma(self, R))


def derive_alpha(plate: PlateParams) -> float:
    """Inertia group ``3 rho l0^4 / (h^2 E t0^2)``."""
    return 3.0 * plate.rho * plate.l0**4 / (plate.h**2 * plate.E * plate.t0**2)


def derive_beta(plate: PlateParams, act: ActuatorParams) -> float:
    """Gyroscopic coupling group ``3 l0 g_em / (b h^3 E)``."""
    return 3.0 * plate.l0 * act.g_em / (act.b * plate.h**3 * plate.E)


def derive_alpha_beta(plate: PlateParams, act: ActuatorParams) -> tuple[float, float]:
    return derive_alpha(plate), derive_beta(plate, act)


def analogy_product(plate: PlateParams, eps: float) -> float:
    """The product ``L*C`` that makes the circuit an analog of the plate.

    Equals ``3 rho l0^4 eps^4 / (h^2 E)``, i.e. ``alpha * eps^4 * t0^2``.
    """
    return 3.0 * plate.rho * plate.l0**4 * eps**4 / (plate.h**2 * plate.E)


def characteristic_voltage(plate: PlateParams, act: ActuatorParams) -> float:
    """Voltage scale ``l0 * (b/l0) * sqrt(2 h rho / g_ee)``.

    Factors are grouped exactly as in the source formula; the ``l0`` factors
    cancel, leaving ``b * sqrt(2 h rho / g_ee)``.
    """
    return plate.l0 * (act.b / plate.l0) * math.sqrt(2.0 * plate.h * plate.rho / act.g_ee)


def derive_circuit_values(
    plate: PlateParams,
    act: ActuatorParams,
    eps: float,
    R0: Optional[float] = None,
    *,
    actuator_capacitance: bool = False,
) -> DimensionlessGroups:
    """Base inductance and capacitance of the analog circuit.

    With ``actuator_capacitance=False`` the values follow from the free
    admittance scale ``R0``: ``L = alpha eps^4 R0 t0`` and ``C = t0 / R0``.
    With ``actuator_capacitance=True`` the node capacitance is the patch
    capacitance ``g_ee`` and ``L`` is whatever closes the analogy product;
    ``R0`` is then implied as ``t0 / g_ee``.
    """
    if not (math.isfinite(eps) and 0 < eps < 1):
        raise ParameterError(f"eps must lie in (0, 1), got {eps!r}")
    if act.b > eps * plate.a * (1 + 1e-12):
        raise ParameterError(
            f"actuator edge b = {act.b!r} m exceeds the grid spacing {eps * plate.a!r} m"
        )
    alpha, beta = derive_alpha_beta(plate, act)
    v0 = characteristic_voltage(plate, act)
    if actuator_capacitance:
        C = act.g_ee
        L = analogy_product(plate, eps) / C
        R0 = plate.t0 / C
    else:
        if R0 is None:
            raise ParameterError("R0 is required unless actuator_capacitance=True")
        _require_positive("derive_circuit_values", R0=R0)
        L = alpha * eps**4 * R0 * plate.t0
        C = plate.t0 / R0
    return DimensionlessGroups(alpha=alpha, beta=beta, eps=eps, L=L, C=C, R0=R0,
                               t0=plate.t0, v0=v0)


def derive_gamma(groups: DimensionlessGroups, R: float) -> float:
    """Dissipation group ``L / (t0 R eps^4)`` of a shunt resistance ``R``."""
    if not R > 0:
        raise ParameterError(f"resistance must be positive, got {R!r}")
    if math.isinf(R):
        return 0.0
    return groups.L / (groups.t0 * R * groups.eps**4)


def resistance_for_gamma(groups: DimensionlessGroups, gamma: float) -> float:
    """Inverse of :func:`derive_gamma`."""
    if not gamma > 0:
        raise ParameterError(f"gamma must be positive, got {gamma!r}")
    return groups.L / (groups.t0 * gamma * groups.eps**4)


# Representative set: 1 m x 1 m x 1 mm aluminium plate carrying a 10 x 10
# array of 0.1 m patches.  t0 is the plate time scale (alpha = 1).
ALUMINIUM = PlateParams(rho=2700.0, E=69e9, h=1e-3, a=1.0, l0=1.0,
                        t0=math.sqrt(3.0 * 2700.0 / (1e-6 * 69e9)))
REFERENCE_ACTUATOR = ActuatorParams(g_mm=0.0, g_12=0.0, g_em=2.5e-4, g_ee=2.2e-6, b=0.1)

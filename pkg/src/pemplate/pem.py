"""Semi-discrete coupled plate/circuit (PEM) equations.

State ``z = (u, u_dot, psi, psi_dot)`` on the interior grid evolves by::

    alpha u''   = -B u   + beta Lap psi'
    alpha psi'' = -B psi - beta Lap u'   - gamma psi'

with ``B`` the discrete biharmonic and ``Lap`` the discrete Laplacian.  The
coupling is gyroscopic (skew), so with ``gamma = 0`` the total energy is
conserved; a shunt resistance adds ``gamma psi'`` to the electrical
equation, which dissipates at rate ``gamma eps^2 |psi'|^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .fd import BoundaryCondition, GridSpec, SparseOperator, assemble_biharmonic, assemble_laplacian
from .params import ActuatorParams


def actuator_constitutive(u_xx, u_yy, v, act: ActuatorParams):
    """Bending moments and stored charge of a patch.

    Returns ``(M_xx, M_yy, Q)`` for curvatures ``u_xx``, ``u_yy`` and
    terminal voltage ``v``; arrays broadcast.
    """
    u_xx, u_yy, v = (np.asarray(a, dtype=float) for a in (u_xx, u_yy, v))
    if not (np.all(np.isfinite(u_xx)) and np.all(np.isfinite(u_yy)) and np.all(np.isfinite(v))):
        raise ValueError("actuator inputs must be finite")
    m_xx = act.g_mm * u_xx + act.g_12 * u_yy - act.g_em / act.b * v
    m_yy = act.g_12 * u_xx + act.g_mm * u_yy - act.g_em / act.b * v
    q = act.b * act.g_em * (u_xx + u_yy) + act.g_ee * v
    return m_xx, m_yy, q


def actuator_current(v_dot, lap_u_dot, act: ActuatorParams):
    """Current into a patch: a capacitor ``g_ee`` in parallel with a
    curvature-rate driven source ``b g_em lap(u_dot)``."""
    return act.g_ee * np.asarray(v_dot, dtype=float) + act.b * act.g_em * np.asarray(lap_u_dot, dtype=float)


@dataclass(frozen=True)
class PEMParams:
    alpha: float
    beta: float
    gamma: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha!r}")
        if not self.gamma >= 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma!r}")

    @classmethod
    def from_groups(cls, groups) -> "PEMParams":
        return cls(groups.alpha, groups.beta, groups.gamma)


@dataclass
class PEMState:
    u: np.ndarray
    u_dot: np.ndarray
    psi: np.ndarray
    psi_dot: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.u, self.u_dot, self.psi, self.psi_dot = (
            np.asarray(a, dtype=float).ravel() for a in (self.u, self.u_dot, self.psi, self.psi_dot)
        )
        sizes = {a.size for a in (self.u, self.u_dot, self.psi, self.psi_dot)}
        if len(sizes) != 1:
            raise ValueError(f"state blocks have inconsistent sizes {sorted(sizes)}")

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.u_dot, self.psi, self.psi_dot])

    @classmethod
    def from_vector(cls, z: np.ndarray, t: float = 0.0) -> "PEMState":
        u, u_dot, psi, psi_dot = np.split(np.asarray(z, dtype=float), 4)
        return cls(u, u_dot, psi, psi_dot, t)

    @classmethod
    def mechanical(cls, u: np.ndarray) -> "PEMState":
        """Purely mechanical deformation at rest, no electrical excitation."""
        z = np.zeros_like(np.asarray(u, dtype=float).ravel())
        return cls(u, z, z, z)


@dataclass(frozen=True)
class EnergyBreakdown:
    mechanical: float
    electrical: float

    @property
    def total(self) -> float:
        return self.mechanical + self.electrical


@dataclass
class PEMSystem:
    """Assembled first-order system ``z' = M z`` on an ``n x n`` grid."""

    grid: GridSpec
    bc: BoundaryCondition
    params: PEMParams
    biharmonic: SparseOperator
    laplacian: SparseOperator
    matrix: sp.csr_matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def energy(self, state: PEMState) -> EnergyBreakdown:
        return energy(state, self)

    def energies(self, Z: np.ndarray) -> np.ndarray:
        """Mechanical and electrical energy for each row of stacked states ``Z``."""
        N = self.grid.size
        u, ud, p, pd = (Z[:, k * N:(k + 1) * N] for k in range(4))
        B = self.biharmonic.matrix
        a, w = self.params.alpha, self.grid.eps**2
        mech = 0.5 * w * (a * np.einsum("ij,ij->i", ud, ud) + np.einsum("ij,ij->i", u, (B @ u.T).T))
        elec = 0.5 * w * (a * np.einsum("ij,ij->i", pd, pd) + np.einsum("ij,ij->i", p, (B @ p.T).T))
        return np.column_stack([mech, elec])


def assemble_pem_system(
    grid: GridSpec,
    bc: BoundaryCondition,
    params: PEMParams,
    biharmonic: Optional[SparseOperator] = None,
    laplacian: Optional[SparseOperator] = None,
) -> PEMSystem:
    """Block matrix of the coupled equations; ``psi`` shares the plate BC family."""
    bc = BoundaryCondition(bc)
    B = biharmonic if biharmonic is not None else assemble_biharmonic(grid, bc)
    Lap = laplacian if laplacian is not None else assemble_laplacian(grid, bc)
    N = grid.size
    if B.shape != (N, N) or Lap.shape != (N, N):
        raise ValueError(f"operator shapes {B.shape}, {Lap.shape} do not match grid size {N}")
    a, b, g = params.alpha, params.beta, params.gamma
    I = sp.identity(N, format="csr")
    Z = None
    M = sp.bmat([
        [Z, I, Z, Z],
        [-B.matrix / a, Z, Z, (b / a) * Lap.matrix],
        [Z, Z, Z, I],
        [Z, -(b / a) * Lap.matrix, -B.matrix / a, -(g / a) * I],
    ], format="csr")
    return PEMSystem(grid, bc, params, B, Lap, M)


def energy(state: PEMState, system: PEMSystem) -> EnergyBreakdown:
    """Quadratic energies weighted by the cell area ``eps^2``."""
    if state.u.size != system.grid.size:
        raise ValueError(f"state size {state.u.size} does not match grid size {system.grid.size}")
    e = system.energies(state.vector[None, :])[0]
    return EnergyBreakdown(float(e[0]), float(e[1]))


def energy_rate(state: PEMState, system: PEMSystem) -> float:
    """Exact time derivative of the total energy: ``-gamma eps^2 |psi'|^2``."""
    return -system.params.gamma * system.grid.eps**2 * float(state.psi_dot @ state.psi_dot)


@dataclass
class Trajectory:
    system: PEMSystem
    t: np.ndarray
    Z: np.ndarray

    def __len__(self):
        return len(self.t)

    def __getitem__(self, k: int) -> PEMState:
        return PEMState.from_vector(self.Z[k], float(self.t[k]))

    def block(self, k: int) -> np.ndarray:
        N = self.system.grid.size
        return self.Z[:, k * N:(k + 1) * N]

    @property
    def u(self):
        return self.block(0)

    @property
    def u_dot(self):
        return self.block(1)

    @property
    def psi(self):
        return self.block(2)

    @property
    def psi_dot(self):
        return self.block(3)

    def energies(self) -> np.ndarray:
        return self.system.energies(self.Z)


def integrate(
    system: PEMSystem,
    initial: PEMState,
    dt: float,
    steps: int,
    sample_every: int = 1,
    observer: Optional[Callable[[int, np.ndarray], None]] = None,
    refine: bool = True,
) -> Trajectory:
    """Implicit-midpoint time stepping.

    Each step solves ``(I - dt/2 M) z+ = (I + dt/2 M) z`` with one sparse LU
    factorization reused for every step.  States are kept every
    ``sample_every`` steps, always including the first and last;
    ``observer(k, z)`` sees every step, including ``k = 0``.

    ``refine`` applies one step of iterative refinement to every solve.
    Without it the per-step rounding of the LU solve accumulates to about
    1e-9 relative energy drift over 1e5 steps; with it the drift stays
    near 1e-13.
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"dt must be positive, got {dt!r}")
    if steps < 0 or sample_every < 1:
        raise ValueError("steps must be >= 0 and sample_every >= 1")
    z = initial.vector
    if z.size != system.dim:
        raise ValueError(f"initial state has size {z.size}, system has {system.dim}")
    I = sp.identity(system.dim, format="csc")
    M = system.matrix.tocsc()
    lu = spla.splu((I - 0.5 * dt * M).tocsc())
    if not np.all(np.isfinite(lu.U.diagonal())) or np.any(lu.U.diagonal() == 0):
        raise ArithmeticError("implicit midpoint step matrix is singular")
    explicit = (I + 0.5 * dt * M).tocsr()
    implicit = (I - 0.5 * dt * M).tocsr()
    kept_t, kept_z = [initial.t], [z.copy()]
    if observer is not None:
        observer(0, z)
    for k in range(1, steps + 1):
        rhs = explicit @ z
        z = lu.solve(rhs)
        if refine:
            z += lu.solve(rhs - implicit @ z)
        if observer is not None:
            observer(k, z)
        if k % sample_every == 0 or k == steps:
            kept_t.append(initial.t + k * dt)
            kept_z.append(z.copy())
    return Trajectory(system, np.array(kept_t), np.array(kept_z))

"""Plane-wave dispersion, sine-mode projection and single-mode dynamics.

For a simply supported plate the sine modes diagonalize both the biharmonic
and the Laplacian, so each mode ``(m, n)`` of the coupled system reduces to::

    p'' = -w0^2 p - g q'
    q'' = -w0^2 q + g p' - (gamma/alpha) q'

with ``w0^2 = k^4/alpha`` and ``g = beta k^2/alpha``, where ``k^2`` is
``(m pi)^2 + (n pi)^2`` on the continuum or ``mu_m + mu_n`` on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.fft
import scipy.linalg
import scipy.optimize

from .fd import GridSpec
from .params import DimensionlessGroups, derive_gamma
from .pem import PEMParams


# --------------------------------------------------------------------------
# dispersion

@dataclass(frozen=True)
class DispersionPoint:
    k: np.ndarray
    omega_fast: np.ndarray
    omega_slow: np.ndarray
    vp_fast: np.ndarray
    vp_slow: np.ndarray
    amp_ratio_fast: np.ndarray
    amp_ratio_slow: np.ndarray


def dispersion(k, alpha: float, beta: float) -> DispersionPoint:
    """Branches of ``alpha w^2 +- beta k^2 w - k^4 = 0``.

    Plane waves ``u = A e^{i(k.r - w t)}``, ``psi = B e^{i(k.r - w t)}``
    give ``(k^4 - alpha w^2) A = i beta k^2 w B``; the determinant splits
    into the two quadratics above.  ``amp_ratio_*`` is ``A/B`` on each
    branch (``-i`` fast, ``+i`` slow).  Works elementwise on arrays.
    """
    k, alpha, beta = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (k, alpha, beta)))
    if np.any(k <= 0):
        raise ValueError("wavenumber must be positive")
    if np.any(alpha <= 0) or np.any(beta < 0):
        raise ValueError("need alpha > 0 and beta >= 0")
    k2 = k * k
    root = np.sqrt(beta * beta + 4.0 * alpha)
    w_fast = k2 * (root + beta) / (2.0 * alpha)
    w_slow = 2.0 * k2 / (root + beta)          # = k^2 (root - beta)/(2 alpha) without cancellation

    def ratio(w, limit):
        detuning = k2 * k2 - alpha * w * w
        with np.errstate(invalid="ignore", divide="ignore"):
            r = 1j * beta * k2 * w / detuning
        # beta -> 0: the branches merge and the ratio tends to its branch sign
        return np.where(beta == 0, limit, r)

    return DispersionPoint(
        k=k, omega_fast=w_fast, omega_slow=w_slow,
        vp_fast=w_fast / k, vp_slow=w_slow / k,
        amp_ratio_fast=ratio(w_fast, -1j), amp_ratio_slow=ratio(w_slow, 1j),
    )


def normalized_phase_speeds(alpha: float, beta: float) -> tuple[float, float]:
    """``w/k^2`` on the two branches, ``beta/(2 alpha) (sqrt(1 + 4 alpha/beta^2) +- 1)``."""
    if beta == 0:
        c = 1.0 / math.sqrt(alpha)
        return c, c
    base = beta / (2 * alpha)
    root = math.sqrt(1 + 4 * alpha / beta**2)
    return base * (root + 1), base * (root - 1)


# --------------------------------------------------------------------------
# sine modes

@dataclass(frozen=True, order=True)
class Mode:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ValueError(f"mode indices must be >= 1, got {(self.m, self.n)}")

    def k2(self, grid: Optional[GridSpec] = None) -> float:
        """Continuous ``(m pi)^2 + (n pi)^2``, or the discrete Laplacian eigenvalue on ``grid``."""
        if grid is None:
            return math.pi**2 * (self.m**2 + self.n**2)
        e = grid.eps
        mu = lambda j: 2.0 * (1.0 - math.cos(j * math.pi * e)) / e**2
        return mu(self.m) + mu(self.n)

    def shape(self, grid: GridSpec) -> np.ndarray:
        """Mode shape with unit ``eps^2``-weighted norm on ``grid``."""
        if self.m > grid.n or self.n > grid.n:
            raise ValueError(f"mode {(self.m, self.n)} exceeds the grid Nyquist limit n={grid.n}")
        x, y = grid.coords()
        return 2.0 * np.sin(self.m * math.pi * x) * np.sin(self.n * math.pi * y)


def all_modes(grid: GridSpec) -> list[Mode]:
    return [Mode(m, n) for m in range(1, grid.n + 1) for n in range(1, grid.n + 1)]


def modal_project(field: np.ndarray, modes: Sequence[Mode], grid: GridSpec) -> np.ndarray:
    """Coefficients of ``field`` on orthonormal sine modes (weight ``eps^2``)."""
    field = np.asarray(field, dtype=float).reshape(grid.n, grid.n)
    for mode in modes:
        if mode.m > grid.n or mode.n > grid.n:
            raise ValueError(f"mode {(mode.m, mode.n)} exceeds the grid Nyquist limit n={grid.n}")
    # type-I DST gives 4 sum f sin sin; the orthonormal shapes carry a factor 2
    full = 0.5 * grid.eps**2 * scipy.fft.dstn(field, type=1)
    return np.array([full[mode.m - 1, mode.n - 1] for mode in modes])


def modal_reconstruct(coeffs: np.ndarray, modes: Sequence[Mode], grid: GridSpec) -> np.ndarray:
    out = np.zeros(grid.size)
    for c, mode in zip(coeffs, modes):
        out += c * mode.shape(grid)
    return out


# --------------------------------------------------------------------------
# single-mode dynamics

def mode_matrix(k2: float, params: PEMParams) -> np.ndarray:
    """First-order matrix for ``(p, p', q, q')``."""
    a = params.alpha
    w02 = k2 * k2 / a
    g = params.beta * k2 / a
    c = params.gamma / a
    return np.array([
        [0.0, 1.0, 0.0, 0.0],
        [-w02, 0.0, 0.0, -g],
        [0.0, 0.0, 0.0, 1.0],
        [0.0, g, -w02, -c],
    ])


def spectral_abscissa(A: np.ndarray) -> float:
    return float(np.max(np.linalg.eigvals(A).real))


@dataclass(frozen=True)
class ModeTrajectory:
    mode: Mode
    t: np.ndarray
    p: np.ndarray
    p_dot: np.ndarray
    q: np.ndarray
    q_dot: np.ndarray
    mechanical: np.ndarray
    electrical: np.ndarray
    decay_rate: float
    eigenvalues: np.ndarray
    method: str

    @property
    def total(self) -> np.ndarray:
        return self.mechanical + self.electrical


def mode_evolution(
    mode: Mode,
    params: PEMParams,
    init: Sequence[float],
    t_span: tuple[float, float],
    samples: int,
    grid: Optional[GridSpec] = None,
) -> ModeTrajectory:
    """Closed-form evolution of one mode by eigendecomposition.

    Falls back to matrix exponentials when the 4x4 matrix is (nearly)
    defective.  Energies are ``alpha/2 (x'^2 + w0^2 x^2)`` for ``x = p, q``,
    which equal the grid energies of the corresponding mode shapes.
    """
    k2 = mode.k2(grid)
    A = mode_matrix(k2, params)
    w0 = k2 / math.sqrt(params.alpha)
    # energy-normal coordinates (w0 p, p', w0 q, q'): the undamped matrix is
    # skew-symmetric there and i*As is Hermitian
    scale = np.array([w0, 1.0, w0, 1.0])
    As = A * scale[:, None] / scale[None, :]
    t = np.linspace(t_span[0], t_span[1], samples)
    x0 = scale * np.asarray(init, dtype=float)
    if params.gamma == 0:
        # orthonormal eigenvectors even when the two branches nearly coincide
        w, V = np.linalg.eigh(1j * As)
        lam = -1j * w
    else:
        lam, V = np.linalg.eig(As)
    tau = t - t_span[0]
    if np.linalg.cond(V) < 1e8:
        c = np.linalg.solve(V, x0)
        X = (V @ (c[:, None] * np.exp(np.outer(lam, tau)))).real.T
        method = "eig"
    else:
        X = np.array([scipy.linalg.expm(As * s) @ x0 for s in tau])
        method = "expm"
    a = params.alpha
    mech = 0.5 * a * (X[:, 0] ** 2 + X[:, 1] ** 2)
    elec = 0.5 * a * (X[:, 2] ** 2 + X[:, 3] ** 2)
    p, pd, q, qd = (X / scale).T
    rate = 0.0 if params.gamma == 0 else float(lam.real.max())
    return ModeTrajectory(mode, t, p, pd, q, qd, mech, elec, rate, lam, method)


# --------------------------------------------------------------------------
# optimal shunt resistance

def decay_rate(mode: Mode, groups: DimensionlessGroups, R: float, grid: Optional[GridSpec] = None) -> float:
    """Spectral abscissa of the mode with shunt ``R`` (negative means decaying)."""
    params = PEMParams(groups.alpha, groups.beta, derive_gamma(groups, R))
    return spectral_abscissa(mode_matrix(mode.k2(grid), params))


@dataclass(frozen=True)
class ResistanceOptimum:
    R_star: float
    gamma_star: float
    decay_rate_star: float
    interior: bool
    R_sweep: np.ndarray
    rate_sweep: np.ndarray


def optimize_resistance(
    mode: Mode,
    groups: DimensionlessGroups,
    R_bounds: tuple[float, float],
    grid: Optional[GridSpec] = None,
    sweep_points: int = 241,
) -> ResistanceOptimum:
    """Shunt resistance that makes the slowest pole of ``mode`` decay fastest.

    A log-spaced sweep brackets the minimum of the spectral abscissa, then a
    golden-section search on ``log R`` refines it.  If the sweep minimum is
    at an endpoint, that endpoint is returned with ``interior=False``.
    """
    lo, hi = R_bounds
    if not (0 < lo < hi) or math.log10(hi / lo) < 4:
        raise ValueError(f"R_bounds {R_bounds!r} must be positive and span at least 4 decades")
    f = lambda x: decay_rate(mode, groups, math.exp(x), grid)
    xs = np.linspace(math.log(lo), math.log(hi), sweep_points)
    rates = np.array([f(x) for x in xs])
    i = int(np.argmin(rates))
    if i == 0 or i == len(xs) - 1:
        R = float(math.exp(xs[i]))
        return ResistanceOptimum(R, derive_gamma(groups, R), float(rates[i]), False,
                                 np.exp(xs), rates)
    res = scipy.optimize.minimize_scalar(f, bracket=(xs[i - 1], xs[i], xs[i + 1]),
                                         method="golden", options={"xtol": 1e-10})
    x = float(res.x) if res.fun <= rates[i] else float(xs[i])
    R = math.exp(x)
    return ResistanceOptimum(R, derive_gamma(groups, R), f(x), True, np.exp(xs), rates)

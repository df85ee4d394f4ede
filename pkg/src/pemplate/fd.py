"""Finite-difference Laplacian and biharmonic operators on the unit square.

Unknowns live on the ``n x n`` interior nodes of a uniform grid with spacing
``eps = 1/(n+1)``, ordered row-major: node ``(i, j)`` with ``1 <= i, j <= n``
has flat index ``(i-1)*n + (j-1)``; ``i`` runs along x and ``j`` along y.
Boundary nodes carry ``u = 0`` and are never stored.  Ghost nodes one layer
outside the boundary are eliminated with the boundary-condition rule

* clamped: ``u[-1] = u[1]``  (zero normal slope)
* simply supported: ``u[-1] = -u[1]``  (zero normal curvature)

so both operators stay symmetric.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import scipy.sparse as sp


class BoundaryCondition(enum.Enum):
    CLAMPED = "clamped"
    SIMPLY_SUPPORTED = "simply_supported"

    @property
    def ghost_sign(self) -> int:
        return 1 if self is BoundaryCondition.CLAMPED else -1

    @classmethod
    def parse(cls, text: str) -> "BoundaryCondition":
        key = text.strip().lower().replace("-", "_").replace(" ", "_")
        aliases = {"clamped": cls.CLAMPED, "ss": cls.SIMPLY_SUPPORTED,
                   "simply_supported": cls.SIMPLY_SUPPORTED}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(
                f"unknown boundary condition {text!r}; expected 'clamped' or 'simply_supported'"
            ) from None


@dataclass(frozen=True)
class GridSpec:
    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"grid needs n >= 1 interior nodes per side, got {self.n!r}")

    @property
    def eps(self) -> float:
        return 1.0 / (self.n + 1)

    @property
    def size(self) -> int:
        return self.n * self.n

    def index(self, i: int, j: int) -> int:
        return (i - 1) * self.n + (j - 1)

    def coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened (x, y) of the interior nodes."""
        s = np.arange(1, self.n + 1) * self.eps
        X, Y = np.meshgrid(s, s, indexing="ij")
        return X.ravel(), Y.ravel()

    def sample(self, f: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
        x, y = self.coords()
        return np.asarray(f(x, y), dtype=float) * np.ones_like(x)

    def depth(self) -> np.ndarray:
        """Distance (in nodes) of each interior node from the nearest boundary node."""
        i = np.arange(1, self.n + 1)
        d = np.minimum(i, self.n + 1 - i)
        return np.minimum.outer(d, d).ravel()


@dataclass(frozen=True)
class SparseOperator:
    """Immutable square sparse operator on the interior grid."""

    matrix: sp.csr_matrix
    symmetric: bool = False

    def __post_init__(self):
        self.matrix.sort_indices()
        if self.symmetric:
            asym = abs(self.matrix - self.matrix.T)
            if asym.nnz and asym.max() > 1e-12 * max(abs(self.matrix).max(), 1.0):
                raise ValueError("operator flagged symmetric but is not")

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    def __matmul__(self, other):
        return self.matrix @ other

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def triples(self) -> Iterable[tuple[int, int, float]]:
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        for k in order:
            yield int(coo.row[k]), int(coo.col[k]), float(coo.data[k])

    def to_coo_text(self) -> str:
        """``row col value`` per line, preceded by a ``# n <dim> symmetric <0|1>`` header."""
        buf = io.StringIO()
        buf.write(f"# n {self.shape[0]} symmetric {int(self.symmetric)}\n")
        for r, c, v in self.triples():
            buf.write(f"{r} {c} {v!r}\n")
        return buf.getvalue()

    @classmethod
    def from_coo_text(cls, text: str) -> "SparseOperator":
        dim, symmetric = None, False
        rows, cols, vals = [], [], []
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) >= 2 and parts[0] == "n":
                    dim = int(parts[1])
                    if len(parts) >= 4 and parts[2] == "symmetric":
                        symmetric = bool(int(parts[3]))
                continue
            try:
                r, c, v = line.split()
                rows.append(int(r)); cols.append(int(c)); vals.append(float(v))
            except ValueError:
                raise ValueError(f"line {lineno}: expected 'row col value', got {line!r}") from None
        if dim is None:
            dim = max(max(rows, default=-1), max(cols, default=-1)) + 1
        m = sp.csr_matrix((vals, (rows, cols)), shape=(dim, dim))
        return cls(m, symmetric=symmetric)


def _second_difference(n: int) -> sp.csr_matrix:
    return sp.diags([np.ones(n - 1), -2.0 * np.ones(n), np.ones(n - 1)], [-1, 0, 1], format="csr")


def assemble_laplacian(grid: GridSpec, bc: BoundaryCondition) -> SparseOperator:
    """Five-point Laplacian with ``u = 0`` on the boundary.

    Both boundary-condition families share ``u = 0`` on the edge, and the
    five-point stencil never reaches a ghost node, so ``bc`` does not change
    the result.  It is accepted for interface symmetry.
    """
    BoundaryCondition(bc)
    n = grid.n
    d2 = _second_difference(n)
    eye = sp.identity(n, format="csr")
    lap = (sp.kron(d2, eye) + sp.kron(eye, d2)) / grid.eps**2
    return SparseOperator(lap.tocsr(), symmetric=True)


# offset -> coefficient of the 13-point stencil (times eps^-4)
BIHARMONIC_STENCIL = {
    (0, 0): 20.0,
    (1, 0): -8.0, (-1, 0): -8.0, (0, 1): -8.0, (0, -1): -8.0,
    (1, 1): 2.0, (1, -1): 2.0, (-1, 1): 2.0, (-1, -1): 2.0,
    (2, 0): 1.0, (-2, 0): 1.0, (0, 2): 1.0, (0, -2): 1.0,
}


def fold_index(k: int, n: int, ghost_sign: int) -> tuple[Optional[int], int]:
    """Map a 1-D node index onto the interior.

    Returns ``(index, sign)``; ``index`` is ``None`` for boundary nodes
    (zero value).  Ghost nodes ``0 - m`` and ``n + 1 + m`` reflect across
    the boundary with ``ghost_sign``.
    """
    if 1 <= k <= n:
        return k, 1
    if k == 0 or k == n + 1:
        return None, 0
    if k < 0:
        return -k, ghost_sign
    return 2 * (n + 1) - k, ghost_sign


def assemble_biharmonic(grid: GridSpec, bc: BoundaryCondition) -> SparseOperator:
    """Thirteen-point biharmonic with ghost elimination, scaled by ``eps^-4``."""
    bc = BoundaryCondition(bc)
    n = grid.n
    if n < 5:
        raise ValueError(f"biharmonic stencil needs n >= 5 interior nodes per side, got {n}")
    s = bc.ghost_sign
    rows, cols, vals = [], [], []
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            r = grid.index(i, j)
            for (di, dj), c in BIHARMONIC_STENCIL.items():
                ii, si = fold_index(i + di, n, s)
                jj, sj = fold_index(j + dj, n, s)
                if ii is None or jj is None:
                    continue
                rows.append(r)
                cols.append(grid.index(ii, jj))
                vals.append(c * si * sj)
    m = sp.csr_matrix((vals, (rows, cols)), shape=(grid.size, grid.size)) / grid.eps**4
    return SparseOperator(m.tocsr(), symmetric=True)


@dataclass(frozen=True)
class ConvergenceStudy:
    eps: np.ndarray
    errors: np.ndarray
    order: float
    exact: bool

    def __str__(self):
        return "exact" if self.exact else f"{self.order:.4f}"


def estimate_convergence_order(
    field: Callable[[np.ndarray, np.ndarray], np.ndarray],
    exact: Callable[[np.ndarray, np.ndarray], np.ndarray],
    bc: BoundaryCondition = BoundaryCondition.SIMPLY_SUPPORTED,
    ns: Sequence[int] = (7, 15, 31, 63),
    margin: int = 0,
) -> ConvergenceStudy:
    """Max-norm error of the discrete biharmonic under grid refinement.

    ``margin`` excludes nodes within that many layers of the boundary from
    the error norm.  The order is the least-squares slope of ``log(err)``
    against ``log(eps)``; when every error sits at rounding level the
    stencil is exact for ``field`` and ``exact=True`` is reported instead.
    """
    if len(ns) < 3:
        raise ValueError("need at least 3 refinement levels")
    epss, errs, scales = [], [], []
    for n in ns:
        grid = GridSpec(n)
        B = assemble_biharmonic(grid, bc)
        u = grid.sample(field)
        ref = grid.sample(exact)
        keep = grid.depth() > margin
        if not keep.any():
            raise ValueError(f"margin {margin} leaves no nodes on the n={n} grid")
        err = np.abs((B @ u) - ref)[keep]
        epss.append(grid.eps)
        errs.append(err.max())
        # rounding floor of the stencil: 32 terms of size |u|/eps^4
        scales.append(32 * np.finfo(float).eps * np.abs(u).max() / grid.eps**4 + np.abs(ref).max() * 1e-15)
    epss, errs = np.array(epss), np.array(errs)
    if np.all(errs <= 100 * np.array(scales)):
        return ConvergenceStudy(epss, errs, math.inf, True)
    slope = np.polyfit(np.log(epss), np.log(errs), 1)[0]
    return ConvergenceStudy(epss, errs, float(slope), False)

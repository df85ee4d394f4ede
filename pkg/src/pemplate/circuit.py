"""Lumped electric analog of the discretized plate.

Every interior grid node becomes a circuit node with a capacitor to ground,
and every stencil neighbour pair is joined by an inductor.  Node voltage
plays the role of deflection velocity.  Matching the nodal (Kirchhoff)
equations against the 13-point stencil fixes the edge admittances; the
diagonal and second-axial edges come out as negative inductances, which
are realized with an op-amp generalized impedance converter (GIC) behind a
negative impedance converter.

Netlist text format (SPICE-compatible cards, one per line)::

    * pemplate analog netlist
    * pemplate: n=<n> bc=<clamped|simply_supported> R0=<float> t0=<float>
    L<k><idx> <node> <node> <henry>      k in {A, D, S}: axial, diagonal, second-axial
    C<k><idx> <node> <node> <farad>
    R<k><idx>... <node> <node> <ohm>
    E<k><idx>... <out> <ref> <in+> <in-> <gain>   ideal op-amp as a VCVS
    .END

Grid node ``(i, j)`` is named ``n<i>_<j>``; ground is ``0``.  Values are
written with ``repr`` so the format round-trips floats exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
import sympy

from .fd import BIHARMONIC_STENCIL, BoundaryCondition, GridSpec, SparseOperator, fold_index

GROUND = "0"
OPAMP_GAIN = 1e6


class EdgeKind(enum.Enum):
    AXIAL = "A"
    DIAGONAL = "D"
    SECOND_AXIAL = "S"
    GROUND = "G"

    @classmethod
    def of_offset(cls, di: int, dj: int) -> "EdgeKind":
        if (di, dj) == (0, 0):
            return cls.GROUND
        if abs(di) + abs(dj) == 1:
            return cls.AXIAL
        if abs(di) == abs(dj) == 1:
            return cls.DIAGONAL
        if {abs(di), abs(dj)} == {0, 2}:
            return cls.SECOND_AXIAL
        raise ValueError(f"offset {(di, dj)} is not part of the stencil")


def node_name(i: int, j: int) -> str:
    return f"n{i}_{j}"


@dataclass(frozen=True)
class Component:
    kind: str              # SPICE element letter: L, C, R or E
    label: str
    nodes: tuple[str, ...]
    value: float

    @property
    def edge(self) -> Optional[EdgeKind]:
        try:
            return EdgeKind(self.label[1])
        except (IndexError, ValueError):
            return None

    @property
    def grounded(self) -> bool:
        return self.kind in "LCR" and GROUND in self.nodes

    def card(self) -> str:
        return " ".join((self.label, *self.nodes, repr(float(self.value))))


@dataclass
class Netlist:
    n: int
    bc: BoundaryCondition
    R0: float
    t0: float
    components: list[Component] = field(default_factory=list)

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.n)

    @property
    def expanded(self) -> bool:
        return any(c.kind == "E" for c in self.components)

    def nodes(self) -> list[str]:
        seen = {}
        for c in self.components:
            for node in c.nodes:
                if node != GROUND:
                    seen.setdefault(node, None)
        return list(seen)

    def count(self, kind: str, edge: Optional[EdgeKind] = None, grounded: Optional[bool] = None) -> int:
        return sum(
            1 for c in self.components
            if c.kind == kind
            and (edge is None or c.edge is edge)
            and (grounded is None or c.grounded == grounded)
        )

    def to_text(self) -> str:
        lines = [
            "* pemplate analog netlist",
            f"* pemplate: n={self.n} bc={self.bc.value} R0={self.R0!r} t0={self.t0!r}",
        ]
        lines += [c.card() for c in self.components]
        lines.append(".END")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Netlist":
        header = None
        comps = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("*"):
                body = line[1:].strip()
                if body.startswith("pemplate:"):
                    header = dict(kv.split("=", 1) for kv in body[len("pemplate:"):].split())
                continue
            if line.upper() == ".END":
                break
            parts = line.split()
            kind = parts[0][0].upper()
            arity = {"L": 2, "C": 2, "R": 2, "E": 4}.get(kind)
            if arity is None or len(parts) != arity + 2:
                raise ValueError(f"line {lineno}: unsupported card {line!r}")
            comps.append(Component(kind, parts[0], tuple(parts[1:-1]), float(parts[-1])))
        if header is None:
            raise ValueError("missing '* pemplate:' header line")
        return cls(int(header["n"]), BoundaryCondition(header["bc"]),
                   float(header["R0"]), float(header["t0"]), comps)


@dataclass(frozen=True)
class AnalogElementValues:
    L_axial: float
    L_diag: float
    L_second: float
    C_ground: float
    R0: float
    t0: float

    def inductance(self, edge: EdgeKind) -> float:
        return {EdgeKind.AXIAL: self.L_axial, EdgeKind.DIAGONAL: self.L_diag,
                EdgeKind.SECOND_AXIAL: self.L_second}[edge]


def match_stencil(stencil: dict = BIHARMONIC_STENCIL) -> dict[EdgeKind, float]:
    """Edge admittances, in units of ``1/(s eps^4)``, that reproduce ``stencil``.

    The nodal equation at a node reads
    ``(sum_e Y_e + Y_g) V - sum_e Y_e V_e = 0``; equating coefficient by
    coefficient with the stencil row gives ``Y_e = -c_e`` for each
    neighbour, and the inductive part of ``Y_g`` is what remains of the
    centre coefficient.
    """
    by_kind: dict[EdgeKind, set] = {}
    centre = stencil[(0, 0)]
    for offset, c in stencil.items():
        if offset == (0, 0):
            continue
        by_kind.setdefault(EdgeKind.of_offset(*offset), set()).add(-c)
        centre -= -c
    out = {}
    for kind, values in by_kind.items():
        if len(values) != 1:
            raise ValueError(f"stencil is not isotropic along {kind.name} edges")
        out[kind] = values.pop()
    out[EdgeKind.GROUND] = centre
    return out


def identify_edge_admittances(eps: float, alpha: float, R0: float, t0: float) -> AnalogElementValues:
    """Inductances and node capacitance of the analog circuit.

    With ``L = alpha eps^4 R0 t0`` and ``C = t0 / R0`` an edge admittance
    ``y / (s eps^4)`` (per unit ``alpha``) is an inductance ``L / y``.
    """
    for name, v in (("eps", eps), ("alpha", alpha), ("R0", R0), ("t0", t0)):
        if not (math.isfinite(v) and v > 0):
            raise ValueError(f"{name} must be finite and positive, got {v!r}")
    Y = match_stencil()
    if Y[EdgeKind.GROUND] != 0:
        raise ValueError("stencil leaves an inductive ground admittance")
    L = alpha * eps**4 * R0 * t0
    return AnalogElementValues(
        L_axial=L / Y[EdgeKind.AXIAL],
        L_diag=L / Y[EdgeKind.DIAGONAL],
        L_second=L / Y[EdgeKind.SECOND_AXIAL],
        C_ground=t0 / R0,
        R0=R0,
        t0=t0,
    )


# --------------------------------------------------------------------------
# negative inductance realization

@dataclass(frozen=True)
class GICRealization:
    """Antoniou GIC ``Z1..Z5`` optionally behind a current-inversion NIC.

    Each branch is ``("R", ohm)`` or ``("C", farad)``.  The GIC presents
    ``Z1 Z3 Z5 / (Z2 Z4)``; the NIC, with equal resistors ``nic_R``,
    negates its load.
    """

    branches: tuple[tuple[str, float], ...]
    inversion: bool = True
    nic_R: float = 10e3

    def __post_init__(self):
        if len(self.branches) != 5:
            raise ValueError("a GIC has exactly five branches")
        for kind, value in self.branches:
            if kind not in ("R", "C") or not (math.isfinite(value) and value > 0):
                raise ValueError(f"invalid GIC branch {(kind, value)!r}")

    @classmethod
    def for_inductance(cls, L: float, C_g: float = 100e-9) -> "GICRealization":
        """Equal-resistor GIC with the capacitor in branch 2: ``L = C_g R^2``."""
        if L == 0 or not math.isfinite(L):
            raise ValueError(f"cannot realize inductance {L!r}")
        R = math.sqrt(abs(L) / C_g)
        return cls((("R", R), ("C", C_g), ("R", R), ("R", R), ("R", R)), inversion=L < 0)


def gic_cards(tag: str, a: str, b: str, real: GICRealization) -> list[Component]:
    """Cards realizing ``real`` between nodes ``a`` and ``b``.

    ``b`` is the local reference of the op-amp outputs, so the element is
    floating as long as the op-amps are ideal.
    """
    x = lambda s: f"x{tag}_{s}"
    cards = []
    gic_in = a
    if real.inversion:
        gic_in = x("m")
        cards += [
            Component("R", f"R{tag}_NA", (a, x("o")), real.nic_R),
            Component("R", f"R{tag}_NB", (x("o"), gic_in), real.nic_R),
            Component("E", f"E{tag}_U0", (x("o"), b, a, gic_in), OPAMP_GAIN),
        ]
    chain = [gic_in, x("2"), x("3"), x("4"), x("5"), b]
    for k, (kind, value) in enumerate(real.branches):
        cards.append(Component(kind, f"{kind}{tag}_Z{k + 1}", (chain[k], chain[k + 1]), value))
    cards += [
        Component("E", f"E{tag}_U1", (x("2"), b, gic_in, x("3")), OPAMP_GAIN),
        Component("E", f"E{tag}_U2", (x("4"), b, x("5"), x("3")), OPAMP_GAIN),
    ]
    return cards


S = sympy.Symbol("s")


def _sym_admittance(kind: str, value: float):
    v = sympy.Rational(value)
    return {"R": 1 / v, "C": S * v, "L": 1 / (S * v)}[kind]


def input_impedance(cards: Sequence[Component], a: str, b: str) -> sympy.Expr:
    """Driving-point impedance between ``a`` and ``b`` with nullor op-amps.

    Modified nodal analysis: unknowns are node voltages relative to ``b``
    plus one output current per op-amp; each op-amp forces its two inputs
    to equal potential.  A unit current is injected at ``a``.
    """
    nodes = []
    for c in cards:
        for node in c.nodes:
            if node != b and node not in nodes:
                nodes.append(node)
    idx = {node: k for k, node in enumerate(nodes)}
    opamps = [c for c in cards if c.kind == "E"]
    size = len(nodes) + len(opamps)
    M = sympy.zeros(size, size)
    rhs = sympy.zeros(size, 1)
    for c in cards:
        if c.kind == "E":
            continue
        y = _sym_admittance(c.kind, c.value)
        p, q = (idx.get(node) for node in c.nodes)
        if p is not None:
            M[p, p] += y
        if q is not None:
            M[q, q] += y
        if p is not None and q is not None:
            M[p, q] -= y
            M[q, p] -= y
    for k, c in enumerate(opamps):
        out, ref, plus, minus = c.nodes
        row = len(nodes) + k
        if ref != b:
            raise ValueError(f"op-amp {c.label} is not referenced to the port node")
        M[idx[out], row] -= 1          # output current enters the out node
        if plus != b:
            M[row, idx[plus]] += 1
        if minus != b:
            M[row, idx[minus]] -= 1
    rhs[idx[a]] = 1
    if sympy.simplify(M.det()) == 0:
        raise ValueError("singular nodal system: the branch choice is not realizable")
    sol = M.LUsolve(rhs)
    return sympy.cancel(sympy.together(sol[idx[a]]))


@dataclass(frozen=True)
class GICImpedance:
    expr: sympy.Expr
    inductance: Optional[float]

    @property
    def inductive(self) -> bool:
        return self.inductance is not None

    def __call__(self, s: complex) -> complex:
        return complex(self.expr.subs(S, s))


def verify_gic(real: GICRealization) -> GICImpedance:
    """Input impedance of the realization as a rational function of ``s``.

    ``inductance`` is set when the result is exactly ``s * L``; otherwise
    the circuit is not inductive and it is ``None``.
    """
    Z = input_impedance(gic_cards("T", "a", GROUND, real), "a", GROUND)
    num, den = sympy.fraction(Z)
    num, den = sympy.Poly(num, S), sympy.Poly(den, S)
    L = None
    if den.degree() == 0 and num.degree() == 1 and num.coeff_monomial(1) == 0:
        L = float(num.coeff_monomial(S) / den.coeff_monomial(1))
    return GICImpedance(Z, L)


# --------------------------------------------------------------------------
# netlist synthesis and verification

def build_netlist(
    values: AnalogElementValues,
    grid: GridSpec,
    bc: BoundaryCondition = BoundaryCondition.SIMPLY_SUPPORTED,
    expand_negatives: bool = False,
) -> Netlist:
    """Tile the analog element over the interior grid.

    Edges that land on a boundary node become inductors to ground (the
    boundary is held at zero voltage).  Edges that land on a ghost node
    fold back onto the node itself: clamped edges carry no current and are
    dropped, simply-supported ones become an inductor to ground of half
    the edge inductance.
    """
    bc = BoundaryCondition(bc)
    n = grid.n
    if n < 5:
        raise ValueError(f"grid too small for second-axial edges: need n >= 5, got {n}")
    sign = bc.ghost_sign
    comps: list[Component] = []
    counters: dict[str, int] = {}

    def add(kind: str, edge: EdgeKind, nodes: tuple[str, str], value: float):
        k = counters[edge.value] = counters.get(edge.value, 0) + 1
        tag = f"{edge.value}{k}"
        if expand_negatives and kind == "L" and value < 0:
            comps.extend(gic_cards(tag, nodes[0], nodes[1], GICRealization.for_inductance(value)))
        else:
            comps.append(Component(kind, f"{kind}{tag}", nodes, value))

    for i in range(1, n + 1):
        for j in range(1, n + 1):
            here = node_name(i, j)
            add("C", EdgeKind.GROUND, (here, GROUND), values.C_ground)
            for di, dj in BIHARMONIC_STENCIL:
                if (di, dj) == (0, 0):
                    continue
                edge = EdgeKind.of_offset(di, dj)
                L = values.inductance(edge)
                ti, si = fold_index(i + di, n, sign)
                tj, sj = fold_index(j + dj, n, sign)
                if ti is None or tj is None:
                    add("L", edge, (here, GROUND), L)
                elif (ti, tj) == (i, j):
                    # ghost folded onto this node: admittance (1 - sign) * Y
                    if si * sj == -1:
                        add("L", edge, (here, GROUND), L / 2)
                elif grid.index(ti, tj) > grid.index(i, j):
                    add("L", edge, (here, node_name(ti, tj)), L)
    return Netlist(n, bc, values.R0, values.t0, comps)


def expected_edge_counts(n: int) -> dict[EdgeKind, int]:
    """Undirected node-to-node edges of each kind on an ``n x n`` lattice."""
    return {
        EdgeKind.AXIAL: 2 * n * (n - 1),
        EdgeKind.DIAGONAL: 2 * (n - 1) ** 2,
        EdgeKind.SECOND_AXIAL: 2 * n * (n - 2),
    }


@dataclass(frozen=True)
class VerificationReport:
    """Result of comparing the nodal equations with ``B/s + alpha s I``.

    Mismatches are relative to the largest operator entry.
    """

    max_mismatch: float
    row_mismatch: np.ndarray
    inductive: sp.csr_matrix
    capacitive: sp.csr_matrix

    def rows_above(self, tol: float = 1e-12) -> np.ndarray:
        return np.flatnonzero(self.row_mismatch > tol)

    def ok(self, tol: float = 1e-12) -> bool:
        return self.max_mismatch <= tol


def nodal_matrices(netlist: Netlist, order: Sequence[str]):
    """Dimensionless nodal admittance split into ``1/s``, ``s^0`` and ``s`` parts."""
    idx = {node: k for k, node in enumerate(order)}
    dim = len(order)
    parts = {"L": ([], [], []), "R": ([], [], []), "C": ([], [], [])}
    for c in netlist.components:
        if c.kind == "L":
            y = netlist.R0 * netlist.t0 / c.value
        elif c.kind == "C":
            y = netlist.R0 * c.value / netlist.t0
        elif c.kind == "R":
            y = netlist.R0 / c.value
        else:
            raise ValueError(f"cannot form nodal equations with {c.kind} element {c.label}")
        rows, cols, vals = parts[c.kind]
        p, q = (idx.get(node) for node in c.nodes)
        for r, col, v in ((p, p, y), (q, q, y), (p, q, -y), (q, p, -y)):
            if r is not None and col is not None:
                rows.append(r); cols.append(col); vals.append(v)
    return tuple(sp.csr_matrix((v, (r, c)), shape=(dim, dim)) for r, c, v in
                 (parts["L"], parts["R"], parts["C"]))


def verify_analog(netlist: Netlist, biharmonic: SparseOperator, alpha: float) -> VerificationReport:
    """Certify that the netlist's nodal equations are ``B/s + alpha s I``."""
    if netlist.expanded:
        raise ValueError("verify_analog needs a netlist without GIC expansion")
    dim = biharmonic.shape[0]
    order = [node_name(i, j) for i in range(1, netlist.n + 1) for j in range(1, netlist.n + 1)]
    present = set(netlist.nodes())
    if len(present) != dim or len(order) != dim or present != set(order):
        raise ValueError(
            f"topology mismatch: netlist has {len(present)} nodes, operator has dimension {dim}"
        )
    inv_s, const, s = nodal_matrices(netlist, order)
    scale = abs(biharmonic.matrix).max()
    diff_l = abs(alpha * inv_s - biharmonic.matrix)
    diff_c = abs(alpha * s - alpha * sp.identity(dim, format="csr"))
    diff_r = abs(alpha * const)
    rows = np.zeros(dim)
    for d in (diff_l, diff_c, diff_r):
        if d.nnz:
            rows = np.maximum(rows, d.max(axis=1).toarray().ravel())
    rows /= scale
    return VerificationReport(float(rows.max()), rows, alpha * inv_s, alpha * s)

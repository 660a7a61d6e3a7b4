"""Gate-level circuits over named registers and the k-SAT verifier construction.

The verifier computes a CNF formula clause by clause into a one-qubit
register, increments a binary counter when the clause holds, uncomputes
the clause bit and finally compares the counter against the clause count.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from ._ops import apply_local
from .cnf import CnfFormula
from .errors import CapExceeded, InputError

NOT = "NOT"
CNOT = "CNOT"
TOFFOLI = "TOFFOLI"
CK_NOT = "CK_NOT"
HADAMARD = "HADAMARD"
T_GATE = "T_GATE"
Z = "Z"
CZ = "CZ"
IDENTITY = "IDENTITY"

ONE_QUBIT_KINDS = frozenset({NOT, HADAMARD, T_GATE, Z, IDENTITY})
REVERSIBLE_KINDS = frozenset({NOT, CNOT, TOFFOLI, CK_NOT, IDENTITY})
ALL_KINDS = ONE_QUBIT_KINDS | {CNOT, TOFFOLI, CK_NOT, CZ}

TOFFOLI_ELEMENTARY_COST = 17


class InsufficientScratch(InputError):
    pass


class ClauseIndexOutOfRange(InputError):
    pass


class NonReversibleGate(InputError):
    pass


class UnsupportedGateKind(InputError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    controls: tuple[int, ...] = ()
    targets: tuple[int, ...] = ()
    # Only meaningful for T_GATE: the adjoint is encoded as power 7.
    power: int = 1

    def __post_init__(self):
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        nc = len(self.controls)
        if self.kind not in ALL_KINDS:
            raise UnsupportedGateKind(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != 1:
            raise InputError(f"{self.kind} takes exactly one target")
        expected = {CNOT: 1, TOFFOLI: 2, CZ: 1}.get(self.kind, 0)
        if self.kind == CK_NOT:
            if nc < 1:
                raise InputError("CK_NOT needs at least one control")
        elif nc != expected:
            raise InputError(f"{self.kind} takes {expected} controls, got {nc}")
        if len(set(self.qubits)) != len(self.qubits):
            raise InputError(f"repeated qubit in {self}")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.controls + self.targets

    def matrix(self) -> np.ndarray:
        """Unitary on ``self.qubits`` (controls first, then target)."""
        return gate_matrix(self)

    def inverse(self) -> "Gate":
        if self.kind == T_GATE:
            return Gate(T_GATE, (), self.targets, power=(-self.power) % 8)
        return self

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "controls": list(self.controls), "targets": list(self.targets)}
        if self.kind == T_GATE:
            d["power"] = self.power
        return d


_X = np.array([[0, 1], [1, 0]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_Z = np.diag([1, -1]).astype(complex)


def _controlled_x(nc: int) -> np.ndarray:
    dim = 1 << (nc + 1)
    m = np.eye(dim, dtype=complex)
    m[[dim - 2, dim - 1]] = m[[dim - 1, dim - 2]]
    return m


def gate_matrix(g: Gate) -> np.ndarray:
    if g.kind == NOT:
        return _X.copy()
    if g.kind == HADAMARD:
        return _H.copy()
    if g.kind == Z:
        return _Z.copy()
    if g.kind == IDENTITY:
        return np.eye(2, dtype=complex)
    if g.kind == T_GATE:
        return np.diag([1, np.exp(1j * math.pi / 4 * g.power)])
    if g.kind == CZ:
        return np.diag([1, 1, 1, -1]).astype(complex)
    return _controlled_x(len(g.controls))


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit ids: inputs ``0..num_in-1`` followed by ``num_anc`` ancillas.

    ``out`` is a single qubit inside the input or ancilla range.  The SAT
    verifier additionally names ``cls``, ``cnt`` and a ``scratch`` pool.
    """

    num_in: int
    num_anc: int
    out: int
    cls: int | None = None
    cnt: tuple[int, ...] = ()
    scratch: tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.out < self.total:
            raise InputError("out qubit must lie in the input or ancilla range")
        named = ([self.cls] if self.cls is not None else []) + list(self.cnt) + list(self.scratch)
        if any(not self.num_in <= q < self.total for q in named):
            raise InputError("named sub-registers must lie in the ancilla range")
        if len(set(named)) != len(named):
            raise InputError("named sub-registers overlap")

    @property
    def total(self) -> int:
        return self.num_in + self.num_anc

    @property
    def in_qubits(self) -> range:
        return range(self.num_in)

    @property
    def anc_qubits(self) -> range:
        return range(self.num_in, self.total)

    def to_dict(self) -> dict:
        return {"num_in": self.num_in, "num_anc": self.num_anc, "out": self.out,
                "cls": self.cls, "cnt": list(self.cnt), "scratch": list(self.scratch)}

    @classmethod
    def from_dict(cls, d: dict) -> "RegisterLayout":
        return cls(d["num_in"], d["num_anc"], d["out"], d.get("cls"),
                   tuple(d.get("cnt", ())), tuple(d.get("scratch", ())))


@dataclass(frozen=True)
class QuantumCircuit:
    layout: RegisterLayout
    gates: tuple[Gate, ...]
    gate_count_certificate: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        total = self.layout.total
        for g in self.gates:
            if any(not 0 <= q < total for q in g.qubits):
                raise InputError(f"{g} references a qubit outside the layout")

    @property
    def num_qubits(self) -> int:
        return self.layout.total

    @property
    def is_classical_reversible(self) -> bool:
        return all(g.kind in REVERSIBLE_KINDS for g in self.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def inverse(self) -> "QuantumCircuit":
        return QuantumCircuit(self.layout, tuple(g.inverse() for g in reversed(self.gates)))

    def then(self, other: "QuantumCircuit") -> "QuantumCircuit":
        return QuantumCircuit(self.layout, self.gates + other.gates)

    def to_json(self) -> str:
        payload = {"layout": self.layout.to_dict(),
                   "gates": [g.to_dict() for g in self.gates],
                   "gate_count_certificate": self.gate_count_certificate}
        return json.dumps(payload, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "QuantumCircuit":
        d = json.loads(text)
        gates = tuple(Gate(g["kind"], tuple(g["controls"]), tuple(g["targets"]),
                           g.get("power", 1)) for g in d["gates"])
        return cls(RegisterLayout.from_dict(d["layout"]), gates, d.get("gate_count_certificate"))


def mcx(controls: Sequence[int], target: int) -> Gate:
    """Multi-controlled NOT using the narrowest gate kind available."""
    controls = tuple(controls)
    if not controls:
        return Gate(NOT, (), (target,))
    if len(controls) == 1:
        return Gate(CNOT, controls, (target,))
    if len(controls) == 2:
        return Gate(TOFFOLI, controls, (target,))
    return Gate(CK_NOT, controls, (target,))


# --------------------------------------------------------------------------
# decompositions


def decompose_cknot(g: Gate, scratch: Sequence[int]) -> list[Gate]:
    """Compute-uncompute ladder of ``2k-3`` Toffolis for a k-controlled NOT.

    Scratch qubits must hold ``|0>`` and are returned to ``|0>``.
    """
    if g.kind not in (CK_NOT, TOFFOLI, CNOT):
        raise UnsupportedGateKind(f"cannot decompose {g.kind} as a multi-control NOT")
    c = g.controls
    k = len(c)
    t = g.targets[0]
    if k <= 2:
        return [mcx(c, t)]
    if len(scratch) < k - 2:
        raise InsufficientScratch(f"C^{k}NOT needs {k - 2} scratch qubits, got {len(scratch)}")
    a = list(scratch[: k - 2])
    ladder = [Gate(TOFFOLI, (c[0], c[1]), (a[0],))]
    for i in range(2, k - 1):
        ladder.append(Gate(TOFFOLI, (c[i], a[i - 2]), (a[i - 1],)))
    return ladder + [Gate(TOFFOLI, (c[k - 1], a[k - 3]), (t,))] + ladder[::-1]


def decompose_toffoli(g: Gate) -> list[Gate]:
    """Exact 17-gate Clifford+T realization (``S`` written as two ``T``)."""
    if g.kind != TOFFOLI:
        raise UnsupportedGateKind(f"expected TOFFOLI, got {g.kind}")
    a, b = g.controls
    c = g.targets[0]

    def t(q, power=1):
        return Gate(T_GATE, (), (q,), power=power)

    def cx(ctrl, tgt):
        return Gate(CNOT, (ctrl,), (tgt,))

    h = Gate(HADAMARD, (), (c,))
    return [h, cx(b, c), t(c, 7), cx(a, c), t(c), cx(b, c), t(c, 7), cx(a, c),
            t(b, 7), t(c), h, cx(a, b), t(b, 7), cx(a, b), t(a), t(b), t(b)]


def decompose_to_toffoli(circ: QuantumCircuit, scratch: Sequence[int] | None = None) -> QuantumCircuit:
    """Replace every CK_NOT by Toffolis drawn from the shared scratch pool."""
    pool = circ.layout.scratch if scratch is None else tuple(scratch)
    gates: list[Gate] = []
    for g in circ.gates:
        gates.extend(decompose_cknot(g, pool) if g.kind == CK_NOT else [g])
    return QuantumCircuit(circ.layout, tuple(gates), circ.gate_count_certificate)


def decompose_elementary(circ: QuantumCircuit) -> QuantumCircuit:
    """Full decomposition into {HADAMARD, T_GATE, CNOT, NOT} (plus any Z/CZ/IDENTITY present)."""
    gates: list[Gate] = []
    for g in decompose_to_toffoli(circ).gates:
        gates.extend(decompose_toffoli(g) if g.kind == TOFFOLI else [g])
    return QuantumCircuit(circ.layout, tuple(gates), circ.gate_count_certificate)


def elementary_gate_count(circ: QuantumCircuit) -> int:
    """Gate count after full decomposition, computed without materializing it."""
    total = 0
    for g in circ.gates:
        k = len(g.controls)
        if g.kind == CK_NOT and k >= 3:
            total += (2 * k - 3) * TOFFOLI_ELEMENTARY_COST
        elif g.kind == TOFFOLI or (g.kind == CK_NOT and k == 2):
            total += TOFFOLI_ELEMENTARY_COST
        else:
            total += 1
    return total


def to_cz_form(circ: QuantumCircuit) -> QuantumCircuit:
    """Rewrite into one-qubit gates plus CZ, using CNOT = (I x H) CZ (I x H)."""
    gates: list[Gate] = []
    for g in decompose_elementary(circ).gates:
        if g.kind == CNOT:
            h = Gate(HADAMARD, (), g.targets)
            gates += [h, Gate(CZ, g.controls, g.targets), h]
        elif g.kind in ONE_QUBIT_KINDS or g.kind == CZ:
            gates.append(g)
        else:
            raise UnsupportedGateKind(f"cannot rewrite {g.kind} into CZ form")
    return QuantumCircuit(circ.layout, tuple(gates))


# --------------------------------------------------------------------------
# SAT verifier


def counter_width(m: int) -> int:
    """Counter bits needed to hold the value ``m`` itself."""
    return max(1, int(m).bit_length())


def verifier_layout(phi: CnfFormula) -> RegisterLayout:
    n, m = phi.num_vars, phi.num_clauses
    r = counter_width(m)
    pool = max(phi.arity_bound, r, 2) - 2
    cls = n
    cnt = tuple(range(n + 1, n + 1 + r))
    out = n + 1 + r
    scratch = tuple(range(out + 1, out + 1 + pool))
    return RegisterLayout(n, 2 + r + pool, out, cls, cnt, scratch)


def build_clause_gate(phi: CnfFormula, i: int, layout: RegisterLayout) -> QuantumCircuit:
    """``W_i``: NOT the positive-literal inputs, AND the negated literals into cls, NOT cls.

    ``i`` is 0-based.  Afterwards cls holds the clause value; the inputs of
    positive literals remain flipped until ``W_i`` is inverted.
    """
    if not 0 <= i < phi.num_clauses:
        raise ClauseIndexOutOfRange(f"clause index {i} not in [0, {phi.num_clauses})")
    if layout.cls is None:
        raise InputError("layout has no cls register")
    clause = phi.clauses[i]
    positive = [lit.variable_index - 1 for lit in clause.literals if not lit.negated]
    support = [lit.variable_index - 1 for lit in clause.literals]
    gates = [Gate(NOT, (), (q,)) for q in positive]
    gates.append(mcx(support, layout.cls))
    gates.append(Gate(NOT, (), (layout.cls,)))
    return QuantumCircuit(layout, tuple(gates))


def build_addone(layout: RegisterLayout) -> QuantumCircuit:
    """Increment of cnt (first qubit most significant) controlled on cls.

    Layer ``q`` flips counter bit ``q`` when cls and all less significant
    bits are 1.
    """
    cnt = layout.cnt
    r = len(cnt)
    gates = [mcx((layout.cls,) + cnt[q + 1:], cnt[q]) for q in range(r)]
    return QuantumCircuit(layout, tuple(gates))


def build_compare(m: int, layout: RegisterLayout) -> QuantumCircuit:
    """Flip out iff cnt holds ``bin(m)``; NOT-conjugates the zero bits of ``m``."""
    cnt = layout.cnt
    r = len(cnt)
    if m >= 1 << r:
        raise InputError(f"m={m} does not fit in a {r}-bit counter")
    zeros = [cnt[p] for p in range(r) if not (m >> (r - 1 - p)) & 1]
    flips = [Gate(NOT, (), (q,)) for q in zeros]
    return QuantumCircuit(layout, tuple(flips + [mcx(cnt, layout.out)] + flips))


def certificate_bound(n: int, m: int, k: int) -> int:
    """Elementary-gate upper bound ``34c^2 n^c log^2 n + (70k+2) n^c + 35 c log n``.

    ``c = max(1, log_n m)`` so that ``n^c >= m``; ``n`` is floored at 2.
    """
    n_eff = max(n, 2)
    c = max(1.0, math.log(max(m, 1)) / math.log(n_eff))
    log_n = math.log2(n_eff)
    nc = n_eff ** c
    bound = 34 * c * c * nc * log_n ** 2 + (70 * k + 2) * nc + 35 * c * log_n
    return int(math.ceil(bound))


def build_sat_verifier(phi: CnfFormula) -> QuantumCircuit:
    """``U_Phi``: out ends in ``|Phi(x)>`` and every other ancilla returns to 0."""
    layout = verifier_layout(phi)
    addone = build_addone(layout)
    gates: list[Gate] = []
    for i in range(phi.num_clauses):
        w = build_clause_gate(phi, i, layout)
        gates += list(w.gates) + list(addone.gates) + list(w.inverse().gates)
    gates += list(build_compare(phi.num_clauses, layout).gates)
    bound = certificate_bound(phi.num_vars, phi.num_clauses, max(phi.arity_bound, 1))
    return QuantumCircuit(layout, tuple(gates), bound)


# --------------------------------------------------------------------------
# simulation


def run_reversible(circ: QuantumCircuit, x: Sequence[int]) -> tuple[int, ...]:
    """Propagate a basis state through a classical-reversible circuit."""
    bits = [int(b) for b in x]
    if len(bits) != circ.num_qubits:
        raise InputError(f"expected {circ.num_qubits} bits, got {len(bits)}")
    for g in circ.gates:
        if g.kind not in REVERSIBLE_KINDS:
            raise NonReversibleGate(f"{g.kind} is not classical-reversible")
        if g.kind == IDENTITY:
            continue
        if all(bits[c] for c in g.controls):
            bits[g.targets[0]] ^= 1
    return tuple(bits)


def simulate(circ: QuantumCircuit, state: np.ndarray) -> np.ndarray:
    n = circ.num_qubits
    out = np.asarray(state, dtype=complex)
    for g in circ.gates:
        out = apply_local(out, g.matrix(), g.qubits, n)
    return out


def circuit_unitary(circ: QuantumCircuit, cap: int = 10) -> np.ndarray:
    n = circ.num_qubits
    if n > cap:
        raise CapExceeded(f"{n} qubits exceeds dense unitary cap {cap}")
    dim = 1 << n
    cols = [simulate(circ, np.eye(dim, dtype=complex)[:, j]) for j in range(dim)]
    return np.stack(cols, axis=1)


def acceptance_probability(circ: QuantumCircuit, psi_in: np.ndarray) -> float:
    """Probability of measuring out=1 after running on ``psi_in`` with ancillas zeroed."""
    n_anc = circ.layout.num_anc
    state = np.kron(np.asarray(psi_in, dtype=complex), _zero_ket(n_anc))
    final = simulate(circ, state).reshape((2,) * circ.num_qubits)
    return float(np.sum(np.abs(np.take(final, 1, axis=circ.layout.out)) ** 2))


def _zero_ket(n: int) -> np.ndarray:
    v = np.zeros(1 << n, dtype=complex)
    v[0] = 1.0
    return v


# --------------------------------------------------------------------------
# CZ sandwich normal form


@dataclass(frozen=True)
class CzSandwichCircuit:
    """Time-indexed circuit (times 1..T) with evenly spaced, Z-sandwiched CZ gates."""

    layout: RegisterLayout
    gates: tuple[Gate, ...]
    t1_set: frozenset[int] = field(default_factory=frozenset)
    t2_set: frozenset[int] = field(default_factory=frozenset)

    @property
    def total_steps(self) -> int:
        return len(self.gates)

    def gate_at(self, t: int) -> Gate:
        return self.gates[t - 1]

    def cz_pair(self, t: int) -> tuple[int, int]:
        g = self.gate_at(t)
        return g.controls[0], g.targets[0]

    def as_circuit(self) -> QuantumCircuit:
        return QuantumCircuit(self.layout, self.gates)

    @property
    def stride(self) -> int | None:
        times = sorted(self.t2_set)
        if len(times) < 2:
            return None
        return times[1] - times[0]


def cz_sandwich_normalize(circ: QuantumCircuit) -> CzSandwichCircuit:
    """Wrap each CZ in Z gates on both qubits and pad with IDENTITY to a constant stride.

    The stride is the largest natural gap between consecutive CZ times,
    the smallest stride reachable by padding alone.
    """
    blocks: list[list[Gate]] = [[]]
    for g in circ.gates:
        if g.kind == CZ:
            f, s = g.controls[0], g.targets[0]
            zf, zs = Gate(Z, (), (f,)), Gate(Z, (), (s,))
            blocks[-1] += [zf, zs]
            blocks.append([g])
            blocks.append([zf, zs])
        elif g.kind in ONE_QUBIT_KINDS:
            blocks[-1].append(g)
        else:
            raise UnsupportedGateKind(f"{g.kind} must be rewritten into CZ form first")
    # blocks alternate: prefix, CZ, between, CZ, ..., suffix; merge the Z tails.
    segments: list[list[Gate]] = []
    czs: list[Gate] = []
    current: list[Gate] = []
    for b in blocks:
        if len(b) == 1 and b[0].kind == CZ:
            segments.append(current)
            czs.append(b[0])
            current = []
        else:
            current += b
    segments.append(current)
    gates: list[Gate] = list(segments[0])
    cz_times: list[int] = []
    if czs:
        natural = [len(seg) + 1 for seg in segments[1:-1]]
        stride = max(natural) if natural else 0
        for i, cz in enumerate(czs):
            if i > 0:
                pad = stride - natural[i - 1]
                seg = segments[i]
                lead = seg[-2:]
                gates += seg[:-2] + [Gate(IDENTITY, (), (cz.controls[0],))] * pad + lead
            gates.append(cz)
            cz_times.append(len(gates))
        gates += segments[-1]
    t2 = frozenset(cz_times)
    t1 = frozenset(t for t in range(1, len(gates) + 1) if t not in t2)
    return CzSandwichCircuit(circ.layout, tuple(gates), t1, t2)


def circuit_from_gates(num_in: int, num_anc: int, out: int,
                       gates: Iterable[Gate]) -> QuantumCircuit:
    return QuantumCircuit(RegisterLayout(num_in, num_anc, out), tuple(gates))

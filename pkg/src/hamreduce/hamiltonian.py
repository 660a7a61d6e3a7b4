"""Local Hamiltonians and the circuit-to-Hamiltonian constructions.

A :class:`HamiltonianSpec` is a list of weighted local terms.  Each term
holds a dense block on a sorted qubit support; qubit 0 is the most
significant bit of every basis index.  For the circuit constructions the
circuit register (inputs then ancillas) occupies qubits ``0..N-1`` and the
clock register follows, clock element ``e`` (1-based) living on qubit
``N + e - 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ._ops import embed_sparse, sort_block
from .circuit import (CNOT, CZ, ONE_QUBIT_KINDS, CzSandwichCircuit, Gate,
                      QuantumCircuit)
from .clock import (FORWARD, ClockSchedule, transition_descriptor,
                    validate_schedule)
from .cnf import CnfFormula
from .errors import CapExceeded, InputError

HERMITIAN_TOL = 1e-12
SCHEMA_VERSION = 1

# Threshold constants for the 5-local construction: a = A_CONST*mu/(T+1),
# b = B_CONST*(1-sqrt(mu))/(T+1)^3.
A_CONST = 2.0
B_CONST = 1.0 / 8.0
# The 3-local stabilizer has one term per clock triple.
MAX_STAB_TERMS = 200_000


class ScheduleTooShort(InputError):
    pass


class UnsupportedGate(InputError):
    pass


class ScheduleLacksTwoStepProperty(InputError):
    pass


class GateCountExceedsSchedule(InputError):
    pass


class NotHermitian(InputError):
    pass


@dataclass(frozen=True)
class Thresholds:
    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise InputError(f"thresholds need b > a, got a={self.a}, b={self.b}")


@dataclass(frozen=True)
class LocalTerm:
    coefficient: float
    support: tuple[int, ...]
    block: np.ndarray
    group: str = ""

    def __post_init__(self):
        support = tuple(int(q) for q in self.support)
        block = np.asarray(self.block, dtype=complex)
        if list(support) != sorted(set(support)):
            block, support = sort_block(block, support)
        if block.shape != (1 << len(support), 1 << len(support)):
            raise InputError(f"block shape {block.shape} does not match support {support}")
        if not np.allclose(block, block.conj().T, atol=HERMITIAN_TOL, rtol=0):
            raise NotHermitian(f"block on {support} is not Hermitian")
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "block", block)
        object.__setattr__(self, "coefficient", float(self.coefficient))

    @property
    def norm(self) -> float:
        """Operator norm of ``coefficient * block``."""
        if self.block.size == 1:
            return abs(self.coefficient * self.block[0, 0].real)
        return abs(self.coefficient) * float(np.max(np.abs(np.linalg.eigvalsh(self.block))))

    @property
    def is_diagonal(self) -> bool:
        return not np.any(self.block - np.diag(np.diag(self.block)))


@dataclass(frozen=True)
class HamiltonianSpec:
    total_qubits: int
    terms: tuple[LocalTerm, ...]
    locality: int
    thresholds: Thresholds | None = None
    coefficients: dict | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            if term.support and not (0 <= term.support[0] and term.support[-1] < self.total_qubits):
                raise InputError(f"term support {term.support} outside {self.total_qubits} qubits")
            if len(term.support) > self.locality:
                raise InputError(f"term on {term.support} exceeds locality {self.locality}")

    @property
    def dim(self) -> int:
        return 1 << self.total_qubits

    @property
    def is_diagonal(self) -> bool:
        return all(t.is_diagonal for t in self.terms)

    def group(self, *names: str) -> "HamiltonianSpec":
        """Sub-spec with the terms of the given groups."""
        return HamiltonianSpec(self.total_qubits, tuple(t for t in self.terms if t.group in names),
                               self.locality)

    def without(self, *names: str) -> "HamiltonianSpec":
        return HamiltonianSpec(self.total_qubits,
                               tuple(t for t in self.terms if t.group not in names), self.locality)

    def scaled(self, factor: float) -> "HamiltonianSpec":
        terms = tuple(LocalTerm(t.coefficient * factor, t.support, t.block, t.group)
                      for t in self.terms)
        return HamiltonianSpec(self.total_qubits, terms, self.locality, None, self.coefficients,
                               dict(self.metadata))

    def norm_bound(self) -> float:
        """Triangle-inequality bound on the operator norm."""
        return float(sum(t.norm for t in self.terms))

    def to_sparse(self) -> sp.csr_matrix:
        out = sp.csr_matrix((self.dim, self.dim), dtype=complex)
        for t in self.terms:
            out = out + t.coefficient * embed_sparse(t.block, t.support, self.total_qubits)
        return out.tocsr()

    def diagonal(self) -> np.ndarray:
        """Diagonal of the realized matrix, without building it."""
        n = self.total_qubits
        idx = np.arange(self.dim, dtype=np.int64)
        out = np.zeros(self.dim)
        for t in self.terms:
            d = np.real(np.diag(t.block))
            if not t.support:
                out += t.coefficient * d[0]
                continue
            local = np.zeros(self.dim, dtype=np.int64)
            for q in t.support:
                local = (local << 1) | ((idx >> (n - 1 - q)) & 1)
            out += t.coefficient * d[local]
        return out

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "total_qubits": self.total_qubits,
            "locality": self.locality,
            "thresholds": None if self.thresholds is None else
            {"a": self.thresholds.a, "b": self.thresholds.b},
            "coefficients": self.coefficients,
            "metadata": self.metadata,
            "terms": [{"coeff": t.coefficient, "support": list(t.support), "group": t.group,
                       "block": [[[float(z.real), float(z.imag)] for z in row] for row in t.block]}
                      for t in self.terms],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "HamiltonianSpec":
        try:
            terms = tuple(
                LocalTerm(t["coeff"], tuple(t["support"]),
                          np.array([[complex(re, im) for re, im in row] for row in t["block"]]),
                          t.get("group", ""))
                for t in d["terms"])
            th = d.get("thresholds")
            return cls(int(d["total_qubits"]), terms, int(d["locality"]),
                       None if th is None else Thresholds(th["a"], th["b"]),
                       d.get("coefficients"), d.get("metadata") or {})
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"malformed Hamiltonian spec: {exc}") from None

    @classmethod
    def from_json(cls, text: str) -> "HamiltonianSpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"invalid JSON: {exc}") from None
        return cls.from_dict(d)


def locality_of(spec: HamiltonianSpec) -> int:
    return max((len(t.support) for t in spec.terms), default=0)


_P0 = np.diag([1.0, 0.0]).astype(complex)
_P1 = np.diag([0.0, 1.0]).astype(complex)


def _all_ones_projector(k: int) -> np.ndarray:
    p = np.zeros((1 << k, 1 << k), dtype=complex)
    p[-1, -1] = 1.0
    return p


# --------------------------------------------------------------------------
# trivial SAT Hamiltonian


def build_trivial_sat_hamiltonian(phi: CnfFormula) -> HamiltonianSpec:
    """One diagonal projector per clause onto its falsifying sub-assignment.

    The diagonal entry at basis state ``x`` counts the clauses ``x`` violates.
    """
    terms = []
    for clause in phi.clauses:
        falsify = clause.falsifying_assignment()
        support = tuple(sorted(v - 1 for v in falsify))
        bits = [falsify[q + 1] for q in support]
        block = np.zeros((1 << len(bits), 1 << len(bits)), dtype=complex)
        i = int("".join(map(str, bits)), 2)
        block[i, i] = 1.0
        terms.append(LocalTerm(1.0, support, block, "clause"))
    n = phi.num_vars
    th = Thresholds(1.0 / n, 1.0 - 1.0 / n) if n > 2 else None
    return HamiltonianSpec(n, tuple(terms), max(phi.arity_bound, 1), th,
                           metadata={"construction": "trivial", "num_in": n})


# --------------------------------------------------------------------------
# 5-local construction


def _check_gate(g: Gate) -> None:
    if g.kind in ONE_QUBIT_KINDS or g.kind in (CNOT, CZ):
        return
    raise UnsupportedGate(f"{g.kind} acts on more than two qubits")


def _gate_at(gates: Sequence[Gate], t: int) -> Gate | None:
    return gates[t - 1] if t <= len(gates) else None


def _clock_hop_block(sched: ClockSchedule, t: int, clock_offset: int, include_held: bool):
    """Forward clock operator S_{t-1} -> S_t as (block, qubit ids)."""
    desc = transition_descriptor(sched, t, FORWARD)
    block, elements = desc.operator(include_held)
    return block, [clock_offset + e - 1 for e in elements]


def _combine(op_a: np.ndarray, qa: Sequence[int], op_b: np.ndarray, qb: Sequence[int]):
    """Tensor two operators on disjoint qubit lists, returned in sorted qubit order."""
    return sort_block(np.kron(op_a, op_b), list(qa) + list(qb))


def _prop_term(gate: Gate | None, sched: ClockSchedule, t: int, clock_offset: int,
               include_held: bool, group: str) -> LocalTerm:
    """``1/2 (P_t + P_{t-1} - V_t (x) F_t - h.c.)`` on gate qubits plus clock qubits."""
    fwd, cq = _clock_hop_block(sched, t, clock_offset, include_held)
    # Projectors onto S_t and S_{t-1} expressed on the same clock qubits.
    p_new = np.diag(np.diag(fwd @ fwd.conj().T))
    p_old = np.diag(np.diag(fwd.conj().T @ fwd))
    if gate is None:
        v, gq = np.eye(1, dtype=complex), []
    else:
        v, gq = gate.matrix(), list(gate.qubits)
    eye_v = np.eye(v.shape[0], dtype=complex)
    block = 0.5 * (np.kron(eye_v, p_new + p_old) - np.kron(v, fwd) - np.kron(v.conj().T, fwd.conj().T))
    sblock, support = sort_block(block, gq + cq)
    return LocalTerm(1.0, support, sblock, group)


def _subset_qubits(subset, clock_offset: int) -> list[int]:
    return [clock_offset + e - 1 for e in sorted(subset)]


def build_hu_5local(circ: QuantumCircuit, sched: ClockSchedule, mu: float | None = None,
                    a_const: float = A_CONST, b_const: float = B_CONST) -> HamiltonianSpec:
    """``H_in + H_out + H_prop + H_stab`` with a weight-``d`` Johnson clock.

    Steps past the last gate use ``V_t = I``.  ``mu`` is the soundness
    parameter entering the thresholds; by default ``2**-n_in`` capped at
    ``1/(64 (T+1)^2)`` so that ``b > a``.
    """
    for g in circ.gates:
        _check_gate(g)
    if not validate_schedule(sched).ok:
        raise InputError("clock schedule is not a Hamiltonian path through J(n_cl, d)")
    T = sched.total_steps
    g_count = len(circ.gates)
    if g_count > T:
        raise ScheduleTooShort(f"{g_count} gates need at least {g_count} clock steps, schedule has {T}")
    N = circ.num_qubits
    d = sched.d
    off = N
    total = N + sched.n_cl
    C = comb(sched.n_cl, d)
    terms: list[LocalTerm] = []

    s0 = _subset_qubits(sched.subset(0), off)
    for q in circ.layout.anc_qubits:
        block, support = _combine(_P1, [q], _all_ones_projector(d), s0)
        terms.append(LocalTerm(1.0, support, block, "in"))

    sT = _subset_qubits(sched.subset(T), off)
    block, support = _combine(_P0, [circ.layout.out], _all_ones_projector(d), sT)
    terms.append(LocalTerm(1.0, support, block, "out"))

    for t in range(1, T + 1):
        terms.append(_prop_term(_gate_at(circ.gates, t), sched, t, off, True, "prop"))

    clock_qubits = range(off, off + sched.n_cl)
    for sub in combinations(clock_qubits, d + 1):
        terms.append(LocalTerm(1.0, sub, _all_ones_projector(d + 1), "stab"))
    not_ones = np.eye(1 << d, dtype=complex) - _all_ones_projector(d)
    for sub in combinations(clock_qubits, d):
        terms.append(LocalTerm(1.0 / C, sub, not_ones, "stab"))
    terms.append(LocalTerm(-(C - 1) / C, (), np.eye(1, dtype=complex), "stab"))

    if mu is None:
        mu = min(2.0 ** -circ.layout.num_in, 1.0 / (64 * (T + 1) ** 2))
    th = Thresholds(a_const * mu / (T + 1), b_const * (1 - math.sqrt(mu)) / (T + 1) ** 3)
    meta = {"construction": "five_local", "num_in": circ.layout.num_in,
            "num_anc": circ.layout.num_anc, "n_cl": sched.n_cl, "d": d, "total_steps": T,
            "clock_offset": off, "out": circ.layout.out, "mu": mu, "gates": g_count}
    return HamiltonianSpec(total, tuple(terms), max(locality_from(terms), 1), th, None, meta)


def locality_from(terms: Sequence[LocalTerm]) -> int:
    return max((len(t.support) for t in terms), default=0)


# --------------------------------------------------------------------------
# clock-restricted H'


@dataclass(frozen=True)
class RestrictedHamiltonian:
    """``H'`` on (circuit space) (x) (abstract ``T+1``-dim clock), circuit-major."""

    num_qubits: int
    total_steps: int
    h_in: np.ndarray
    h_out: np.ndarray
    h_prop: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return self.h_in + self.h_out + self.h_prop


def _clock_ket_bra(T: int, a: int, b: int) -> np.ndarray:
    m = np.zeros((T + 1, T + 1), dtype=complex)
    m[a, b] = 1.0
    return m


def build_restricted_prop(circ: QuantumCircuit, total_steps: int) -> RestrictedHamiltonian:
    from .circuit import circuit_unitary

    for g in circ.gates:
        _check_gate(g)
    T = total_steps
    if len(circ.gates) > T:
        raise ScheduleTooShort(f"{len(circ.gates)} gates need at least that many steps, got {T}")
    N = circ.num_qubits
    dim = 1 << N
    eye = np.eye(dim, dtype=complex)

    def on_qubit(m, q):
        return embed_sparse(m, [q], N).toarray()

    h_in = sum((np.kron(on_qubit(_P1, q), _clock_ket_bra(T, 0, 0)) for q in circ.layout.anc_qubits),
               np.zeros((dim * (T + 1),) * 2, dtype=complex))
    h_out = np.kron(on_qubit(_P0, circ.layout.out), _clock_ket_bra(T, T, T))
    h_prop = np.zeros_like(h_out)
    for t in range(1, T + 1):
        g = _gate_at(circ.gates, t)
        v = eye if g is None else circuit_unitary(QuantumCircuit(circ.layout, (g,)), cap=N)
        h_prop += 0.5 * (np.kron(eye, _clock_ket_bra(T, t, t) + _clock_ket_bra(T, t - 1, t - 1))
                         - np.kron(v, _clock_ket_bra(T, t, t - 1))
                         - np.kron(v.conj().T, _clock_ket_bra(T, t - 1, t)))
    return RestrictedHamiltonian(N, T, h_in, h_out, h_prop)


def legal_clock_isometry(num_circuit_qubits: int, sched: ClockSchedule,
                         steps: int | None = None) -> sp.csr_matrix:
    """Sparse isometry ``|x>|t> -> |x>|gamma_t>`` for ``t = 0..steps``."""
    T = sched.total_steps if steps is None else steps
    n_cl = sched.n_cl
    clock_idx = []
    for t in range(T + 1):
        s = sched.subset(t)
        clock_idx.append(sum(1 << (n_cl - e) for e in s))
    clock_idx = np.array(clock_idx, dtype=np.int64)
    x = np.arange(1 << num_circuit_qubits, dtype=np.int64)
    rows = ((x[:, None] << n_cl) | clock_idx[None, :]).ravel()
    cols = np.arange(rows.size)
    dim = 1 << (num_circuit_qubits + n_cl)
    return sp.csr_matrix((np.ones(rows.size, dtype=complex), (rows, cols)), shape=(dim, rows.size))


# --------------------------------------------------------------------------
# 3-local construction


def _hop_pair(sched: ClockSchedule, t_from: int, t_to: int, off: int):
    """Held-free hop ``|gamma_from> -> |gamma_to>`` on the two swapped clock qubits."""
    a, b = sched.subset(t_from), sched.subset(t_to)
    leaving, entering = sorted(a - b), sorted(b - a)
    if len(leaving) != 1:
        raise ScheduleLacksTwoStepProperty(
            f"clock steps {t_from} and {t_to} differ by {len(leaving)} swaps")
    # basis on (leaving, entering): from |10> to |01>
    block = np.zeros((4, 4), dtype=complex)
    block[0b01, 0b10] = 1.0
    return block, [off + leaving[0] - 1, off + entering[0] - 1]


def build_hu_3local(czc: CzSandwichCircuit, sched: ClockSchedule,
                    j_values: dict | None = None) -> HamiltonianSpec:
    """3-local Hamiltonian with a weight-2 clock whose two-step hops are 2-local.

    ``j_values`` may override any of ``J_in, J_prop1, J_prop2, J_stab``.
    ``J_stab`` defaults to ``2h + 16h^2`` where ``h`` bounds the norm of the
    unpenalized part, which keeps the projection-lemma loss at ``1/16``.
    """
    if sched.d != 2:
        raise ScheduleLacksTwoStepProperty("three-local construction needs a weight-2 clock")
    if not validate_schedule(sched, require_two_step=True, require_complete=False).ok:
        raise ScheduleLacksTwoStepProperty("schedule violates the two-step overlap property")
    T = czc.total_steps
    C = comb(sched.n_cl, 2)
    if T > sched.total_steps:
        raise GateCountExceedsSchedule(
            f"{T} time steps need a clock path with {T + 1} vertices, have {len(sched.path)}")
    for t in czc.t2_set:
        if t < 3 or t + 2 > T:
            raise InputError(f"CZ at step {t} lacks its Z sandwich")
    if comb(sched.n_cl, 3) > MAX_STAB_TERMS:
        raise CapExceeded(f"{sched.n_cl} clock qubits need {comb(sched.n_cl, 3)} stabilizer terms, "
                          f"cap is {MAX_STAB_TERMS}")
    N = czc.layout.total
    off = N
    total = N + sched.n_cl

    def p11(t):
        return _all_ones_projector(2), _subset_qubits(sched.subset(t), off)

    groups: dict[str, list[LocalTerm]] = {k: [] for k in ("out", "in", "prop1", "prop2", "stab")}

    blk, q = p11(T)
    out_blk, out_sup = _combine(_P0, [czc.layout.out], blk, q)
    groups["out"].append(LocalTerm(1.0, out_sup, out_blk, "out"))
    blk, q = p11(0)
    for a in czc.layout.anc_qubits:
        in_blk, in_sup = _combine(_P1, [a], blk, q)
        groups["in"].append(LocalTerm(1.0, in_sup, in_blk, "in"))

    for t in range(1, T + 1):
        if t in czc.t2_set:
            continue
        groups["prop1"].append(_prop_term_3(czc.gate_at(t), sched, t, off))

    for t in sorted(czc.t2_set):
        f, s = czc.cz_pair(t)
        hop, hq = _hop_pair(sched, t - 1, t, off)
        # 1/2(-2|0><0|_f - 2|0><0|_s + |1><1|_f + |1><1|_s) split per qubit to stay 3-local
        single = 0.5 * (-2 * _P0 + _P1)
        for qubit in (f, s):
            blk, sup = _combine(single, [qubit], hop + hop.conj().T, hq)
            groups["prop2"].append(LocalTerm(1.0, sup, blk, "prop2"))
        diag = ((t, 1), (t + 1, 6), (t + 2, 1), (t - 3, 1), (t - 2, 6), (t - 1, 1))
        hops = ((t, t + 2, 2), (t, t + 1, 1), (t + 1, t + 2, 1),
                (t - 3, t - 1, 2), (t - 3, t - 2, 1), (t - 2, t - 1, 1))
        for step, w in diag:
            if 0 <= step <= T:
                blk, sup = p11(step)
                groups["prop2"].append(LocalTerm(w / 8, tuple(sup), blk, "prop2"))
        for a_, b_, w in hops:
            if 0 <= a_ <= T and 0 <= b_ <= T:
                hop2, hq2 = _hop_pair(sched, a_, b_, off)
                blk, sup = sort_block(hop2 + hop2.conj().T, hq2)
                groups["prop2"].append(LocalTerm(w / 8, sup, blk, "prop2"))

    clock_qubits = range(off, off + sched.n_cl)
    for sub in combinations(clock_qubits, 3):
        groups["stab"].append(LocalTerm(C, sub, _all_ones_projector(3), "stab"))
    not_ones = np.eye(4, dtype=complex) - _all_ones_projector(2)
    for sub in combinations(clock_qubits, 2):
        groups["stab"].append(LocalTerm(1.0, sub, not_ones, "stab"))
    # every weight-2 clock state other than gamma_0..gamma_T is penalized
    legal = {tuple(sorted(sched.subset(t))) for t in range(T + 1)}
    for pair in combinations(range(1, sched.n_cl + 1), 2):
        if pair not in legal:
            blk = _all_ones_projector(2)
            groups["stab"].append(LocalTerm(1.0, _subset_qubits(pair, off), blk, "stab"))
    groups["stab"].append(LocalTerm(-(C - 1), (), np.eye(1, dtype=complex), "stab"))

    j = {"J_out": float(T + 1), "J_prop1": float(T + 1)}
    j["J_prop2"] = 4 * j["J_prop1"]
    j["J_in"] = 4 * j["J_prop2"]
    j.update({k: float(v) for k, v in (j_values or {}).items()})
    weights = {"out": j["J_out"], "in": j["J_in"], "prop1": j["J_prop1"], "prop2": j["J_prop2"]}
    terms: list[LocalTerm] = []
    for name in ("out", "in", "prop1", "prop2"):
        terms += [LocalTerm(t.coefficient * weights[name], t.support, t.block, t.group)
                  for t in groups[name]]
    h1 = HamiltonianSpec(total, tuple(terms), 3)
    if "J_stab" not in j:
        h = _norm_estimate(h1)
        j["J_stab"] = 2 * h + 16 * h * h
        j["H1_norm"] = h
    terms += [LocalTerm(t.coefficient * j["J_stab"], t.support, t.block, t.group)
              for t in groups["stab"]]
    meta = {"construction": "three_local", "num_in": czc.layout.num_in,
            "num_anc": czc.layout.num_anc, "n_cl": sched.n_cl, "d": 2, "total_steps": T,
            "clock_offset": off, "out": czc.layout.out}
    spec = HamiltonianSpec(total, tuple(terms), 3, None, j, meta)
    if locality_of(spec) > 3:
        raise AssertionError("three-local build produced a wider term")
    return spec


def _prop_term_3(gate: Gate, sched: ClockSchedule, t: int, off: int) -> LocalTerm:
    fwd, cq = _hop_pair(sched, t - 1, t, off)
    p_new = np.diag(np.diag(fwd @ fwd.conj().T))
    p_old = np.diag(np.diag(fwd.conj().T @ fwd))
    v = gate.matrix()
    eye_v = np.eye(2, dtype=complex)
    block = 0.5 * (np.kron(eye_v, p_new + p_old) - np.kron(v, fwd) - np.kron(v.conj().T, fwd.conj().T))
    sblock, support = sort_block(block, list(gate.qubits) + cq)
    return LocalTerm(1.0, support, sblock, "prop1")


DENSE_NORM_CAP = 12


def _norm_estimate(spec: HamiltonianSpec) -> float:
    """Exact operator norm at desk scale, triangle bound beyond."""
    if spec.total_qubits <= DENSE_NORM_CAP:
        w = np.linalg.eigvalsh(spec.to_sparse().toarray())
        return float(np.max(np.abs(w)))
    return spec.norm_bound()


def check_dense_cap(spec: HamiltonianSpec, cap: int) -> None:
    if spec.total_qubits > cap:
        raise CapExceeded(f"{spec.total_qubits} qubits exceeds cap {cap}")

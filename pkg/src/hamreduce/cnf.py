"""k-CNF formulas: DIMACS parsing, evaluation and the exhaustive oracle.

Assignments are bit tuples where ``bits[j - 1]`` is the value of variable
``x_j``.  When an assignment is packed into an integer, variable ``x_1`` is
the most significant bit, so integer order equals lexicographic bit order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded, InputError

DEFAULT_ORACLE_CAP = 24


class MalformedHeader(InputError):
    pass


class LiteralOutOfRange(InputError):
    pass


class TautologicalClause(InputError):
    pass


class DuplicateLiteral(InputError):
    pass


class ClauseCountMismatch(InputError):
    pass


class LengthMismatch(InputError):
    pass


class OracleCapExceeded(CapExceeded):
    pass


@dataclass(frozen=True)
class Literal:
    variable_index: int
    negated: bool = False

    def __post_init__(self):
        if self.variable_index < 1:
            raise LiteralOutOfRange(f"variable index must be >= 1, got {self.variable_index}")

    @classmethod
    def from_int(cls, v: int) -> "Literal":
        if v == 0:
            raise LiteralOutOfRange("0 is not a literal")
        return cls(abs(v), v < 0)

    def to_int(self) -> int:
        return -self.variable_index if self.negated else self.variable_index

    def value(self, bit: int) -> bool:
        return bool(bit) != self.negated


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, ...]

    def __post_init__(self):
        seen: dict[int, bool] = {}
        for lit in self.literals:
            if lit.variable_index in seen:
                if seen[lit.variable_index] == lit.negated:
                    raise DuplicateLiteral(f"variable {lit.variable_index} repeated in clause")
                raise TautologicalClause(
                    f"x{lit.variable_index} and its negation in one clause")
            seen[lit.variable_index] = lit.negated

    @classmethod
    def from_ints(cls, values: Iterable[int]) -> "Clause":
        return cls(tuple(Literal.from_int(v) for v in values))

    def __len__(self) -> int:
        return len(self.literals)

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(lit.variable_index for lit in self.literals)

    def falsifying_assignment(self) -> dict[int, int]:
        """The unique partial assignment (variable -> bit) that violates the clause."""
        return {lit.variable_index: int(lit.negated) for lit in self.literals}

    def evaluate(self, bits: Sequence[int]) -> bool:
        return any(lit.value(bits[lit.variable_index - 1]) for lit in self.literals)


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    arity_bound: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        if self.num_vars < 0:
            raise InputError("num_vars must be non-negative")
        for i, clause in enumerate(self.clauses):
            if len(clause) > self.arity_bound:
                raise InputError(
                    f"clause {i + 1} has {len(clause)} literals, arity bound is {self.arity_bound}")
            for lit in clause.literals:
                if lit.variable_index > self.num_vars:
                    raise LiteralOutOfRange(
                        f"clause {i + 1}: variable {lit.variable_index} exceeds n={self.num_vars}")

    @classmethod
    def from_lists(cls, num_vars: int, clauses: Iterable[Iterable[int]],
                   arity_bound: int | None = None) -> "CnfFormula":
        parsed = tuple(Clause.from_ints(c) for c in clauses)
        if arity_bound is None:
            arity_bound = max((len(c) for c in parsed), default=0)
        return cls(num_vars, arity_bound, parsed)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def to_lists(self) -> list[list[int]]:
        return [[lit.to_int() for lit in c.literals] for c in self.clauses]


def parse_dimacs(text: bytes | str) -> CnfFormula:
    """Parse DIMACS CNF text.

    The arity bound of the result is the length of the longest clause.
    Errors carry the 1-based line number of the offending line.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    header: tuple[int, int] | None = None
    clauses: list[Clause] = []
    current: list[int] = []
    current_line = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None:
                raise MalformedHeader(f"line {lineno}: duplicate header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise MalformedHeader(f"line {lineno}: expected 'p cnf <n> <m>', got {line!r}")
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise MalformedHeader(f"line {lineno}: non-integer header field") from None
            if n < 0 or m < 0:
                raise MalformedHeader(f"line {lineno}: negative header field")
            header = (n, m)
            continue
        if header is None:
            raise MalformedHeader(f"line {lineno}: clause before 'p cnf' header")
        for tok in line.split():
            try:
                v = int(tok)
            except ValueError:
                raise InputError(f"line {lineno}: bad token {tok!r}") from None
            if v == 0:
                clauses.append(_make_clause(current, header[0], current_line or lineno))
                current = []
                current_line = 0
            else:
                if not current:
                    current_line = lineno
                current.append(v)
    if header is None:
        raise MalformedHeader("missing 'p cnf' header")
    if current:
        clauses.append(_make_clause(current, header[0], current_line))
    n, m = header
    if len(clauses) != m:
        raise ClauseCountMismatch(f"header declares {m} clauses, found {len(clauses)}")
    k = max((len(c) for c in clauses), default=0)
    return CnfFormula(n, k, tuple(clauses))


def _make_clause(values: list[int], n: int, lineno: int) -> Clause:
    for v in values:
        if abs(v) > n:
            raise LiteralOutOfRange(f"line {lineno}: literal {v} out of range for n={n}")
    try:
        return Clause.from_ints(values)
    except InputError as exc:
        raise type(exc)(f"line {lineno}: {exc}") from None


def to_dimacs(phi: CnfFormula) -> str:
    lines = ["c generated by hamreduce", f"p cnf {phi.num_vars} {phi.num_clauses}"]
    lines += [" ".join(str(v) for v in clause) + " 0" for clause in phi.to_lists()]
    return "\n".join(lines) + "\n"


def eval_formula(phi: CnfFormula, x: Sequence[int]) -> bool:
    if len(x) != phi.num_vars:
        raise LengthMismatch(f"assignment has {len(x)} bits, formula has {phi.num_vars} variables")
    return all(c.evaluate(x) for c in phi.clauses)


def int_to_bits(value: int, n: int) -> tuple[int, ...]:
    return tuple((value >> (n - 1 - i)) & 1 for i in range(n))


def bits_to_int(bits: Sequence[int]) -> int:
    out = 0
    for b in bits:
        out = (out << 1) | int(b)
    return out


def violation_counts(phi: CnfFormula, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Number of violated clauses for every packed assignment in ``[start, stop)``."""
    n = phi.num_vars
    if stop is None:
        stop = 1 << n
    idx = np.arange(start, stop, dtype=np.int64)
    counts = np.zeros(idx.shape, dtype=np.int64)
    for clause in phi.clauses:
        violated = np.ones(idx.shape, dtype=bool)
        for var, bit in clause.falsifying_assignment().items():
            violated &= ((idx >> (n - var)) & 1) == bit
        counts += violated
    return counts


def brute_force_min_violations(phi: CnfFormula, cap: int = DEFAULT_ORACLE_CAP,
                               chunk: int = 1 << 20) -> tuple[int, tuple[int, ...]]:
    """Exhaustive minimum number of violated clauses with a witness.

    Ties resolve to the lexicographically smallest assignment.
    """
    n = phi.num_vars
    if n > cap:
        raise OracleCapExceeded(f"n={n} exceeds oracle cap {cap}")
    best, best_idx = None, 0
    total = 1 << n
    for start in range(0, total, chunk):
        counts = violation_counts(phi, start, min(total, start + chunk))
        pos = int(np.argmin(counts))
        if best is None or counts[pos] < best:
            best, best_idx = int(counts[pos]), start + pos
        if best == 0:
            break
    return best, int_to_bits(best_idx, n)


def random_kcnf(n: int, m: int, k: int, rng: np.random.Generator) -> CnfFormula:
    """Random formula with ``m`` clauses of exactly ``min(k, n)`` distinct variables."""
    width = min(k, n)
    clauses = []
    for _ in range(m):
        variables = rng.choice(np.arange(1, n + 1), size=width, replace=False)
        signs = rng.integers(0, 2, size=width)
        clauses.append([int(v) if s else -int(v) for v, s in zip(variables, signs)])
    return CnfFormula.from_lists(n, clauses, arity_bound=width)

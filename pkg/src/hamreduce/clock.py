"""Johnson-graph clocks.

A clock over ``n_cl`` qubits with weight ``d`` is a Hamiltonian path
``S_0, S_1, ..., S_T`` through the d-subsets of ``{1..n_cl}``; step ``t``
is encoded by the basis state with ones exactly on ``S_t``.  Consecutive
subsets differ by one swapped element, so advancing the clock flips two bits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb
import numpy as np

from ._ops import embed_sparse, sort_block
from .errors import InputError

FORWARD = "FORWARD"
BACKWARD = "BACKWARD"
PAUSE = "PAUSE"


class TooFewClockQubits(InputError):
    pass


class InvalidParameters(InputError):
    pass


class StepOutOfRange(InputError):
    pass


@dataclass(frozen=True)
class ClockSchedule:
    n_cl: int
    d: int
    path: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(tuple(sorted(s)) for s in self.path))

    @property
    def total_steps(self) -> int:
        return len(self.path) - 1

    def subset(self, t: int) -> frozenset[int]:
        if not 0 <= t <= self.total_steps:
            raise StepOutOfRange(f"step {t} not in [0, {self.total_steps}]")
        return frozenset(self.path[t])

    def to_json(self) -> str:
        return json.dumps([list(s) for s in self.path])

    @classmethod
    def from_json(cls, text: str, n_cl: int | None = None) -> "ClockSchedule":
        path = [tuple(s) for s in json.loads(text)]
        d = len(path[0]) if path else 0
        if n_cl is None:
            n_cl = max((max(s) for s in path if s), default=0)
        return cls(n_cl, d, tuple(path))


@dataclass(frozen=True)
class ClockState:
    t: int
    bits: tuple[int, ...]


@dataclass(frozen=True)
class ClockTermDescriptor:
    """Role sets (1-based clock elements) for a forward/backward/pause clock operator.

    For FORWARD/BACKWARD the operator moves between ``S_{t-span}`` and
    ``S_t``; ``leaving`` is the element that drops out going forward.
    """

    kind: str
    t: int
    leaving: frozenset[int] = frozenset()
    entering: frozenset[int] = frozenset()
    held: frozenset[int] = frozenset()
    span: int = 1

    @property
    def elements(self) -> tuple[int, ...]:
        """Element order used by :meth:`operator`: leaving, entering, then held."""
        return tuple(sorted(self.leaving)) + tuple(sorted(self.entering)) + tuple(sorted(self.held))

    def operator(self, include_held: bool = True) -> tuple[np.ndarray, tuple[int, ...]]:
        """Dense block and the clock elements it acts on (in that order)."""
        if self.kind == PAUSE:
            k = len(self.held)
            block = np.zeros((1 << k, 1 << k), dtype=complex)
            block[-1, -1] = 1.0
            return block, tuple(sorted(self.held))
        nl, ne = len(self.leaving), len(self.entering)
        held = tuple(sorted(self.held)) if include_held else ()
        elements = tuple(sorted(self.leaving)) + tuple(sorted(self.entering)) + held
        k = len(elements)
        old = [1] * nl + [0] * ne + [1] * len(held)
        new = [0] * nl + [1] * ne + [1] * len(held)
        i_old = int("".join(map(str, old)), 2)
        i_new = int("".join(map(str, new)), 2)
        block = np.zeros((1 << k, 1 << k), dtype=complex)
        if self.kind == FORWARD:
            block[i_new, i_old] = 1.0
        else:
            block[i_old, i_new] = 1.0
        return block, elements


@dataclass
class ScheduleReport:
    ok: bool
    violations: list[tuple[int, str]] = field(default_factory=list)


def johnson_path_d2(n_cl: int) -> ClockSchedule:
    """Hamiltonian path in J(n_cl, 2) whose subsets two steps apart share one element.

    Grows the path one element at a time: after the path on ``{1..n-1}``,
    which ends at ``{x, n-1}``, visit ``{n-1, n}``, ``{x, n}`` and then the
    remaining ``{z, n}`` in increasing ``z``.
    """
    if n_cl < 3:
        raise TooFewClockQubits(f"need at least 3 clock qubits, got {n_cl}")
    path: list[tuple[int, int]] = [(1, 2), (2, 3), (1, 3)]
    for n in range(4, n_cl + 1):
        last = path[-1]
        x = min(set(last) - {n - 1})
        path.append((n - 1, n))
        path.append((x, n))
        path.extend((z, n) for z in range(1, n - 1) if z != x)
    return ClockSchedule(n_cl, 2, tuple(path))


def star_clock(n_cl: int) -> ClockSchedule:
    """Weight-2 clock ``{1,2}, {1,3}, ..., {1,n_cl}``.

    Not a Hamiltonian path of J(n_cl, 2), but every one- and two-step swap
    is unique among its vertices, so held-free clock hops never connect two
    other legal clock states.  Costs ``T + 2`` clock qubits for ``T`` steps.
    """
    if n_cl < 3:
        raise TooFewClockQubits(f"need at least 3 clock qubits, got {n_cl}")
    return ClockSchedule(n_cl, 2, tuple((1, k) for k in range(2, n_cl + 1)))


def revolving_door(n: int, k: int) -> list[tuple[int, ...]]:
    """All k-subsets of ``{1..n}``; neighbours differ by a single swap."""
    if k == 0:
        return [()]
    if k == n:
        return [tuple(range(1, n + 1))]
    head = revolving_door(n - 1, k)
    tail = [c + (n,) for c in reversed(revolving_door(n - 1, k - 1))]
    return head + tail


def johnson_path_generic(n_cl: int, d: int) -> ClockSchedule:
    if not 1 <= d < n_cl:
        raise InvalidParameters(f"need 1 <= d < n_cl, got n_cl={n_cl}, d={d}")
    return ClockSchedule(n_cl, d, tuple(revolving_door(n_cl, d)))


def clock_state(sched: ClockSchedule, t: int) -> ClockState:
    s = sched.subset(t)
    return ClockState(t, tuple(int(i in s) for i in range(1, sched.n_cl + 1)))


def transition_descriptor(sched: ClockSchedule, t: int, kind: str, span: int = 1) -> ClockTermDescriptor:
    if kind == PAUSE:
        return ClockTermDescriptor(PAUSE, t, held=sched.subset(t))
    if kind not in (FORWARD, BACKWARD):
        raise InvalidParameters(f"unknown descriptor kind {kind!r}")
    if not span <= t <= sched.total_steps:
        raise StepOutOfRange(f"{kind} step {t} (span {span}) outside [{span}, {sched.total_steps}]")
    prev, cur = sched.subset(t - span), sched.subset(t)
    return ClockTermDescriptor(kind, t, leaving=prev - cur, entering=cur - prev,
                               held=prev & cur, span=span)


def validate_schedule(sched: ClockSchedule, require_two_step: bool = False,
                      require_complete: bool = True) -> ScheduleReport:
    report = ScheduleReport(ok=True)

    def fail(i, why):
        report.ok = False
        report.violations.append((i, why))

    seen: dict[tuple[int, ...], int] = {}
    for t, s in enumerate(sched.path):
        if len(s) != sched.d:
            fail(t, f"size {len(s)} != d={sched.d}")
        if any(not 1 <= e <= sched.n_cl for e in s) or len(set(s)) != len(s):
            fail(t, "elements out of range or repeated")
        if s in seen:
            fail(t, f"repeats vertex of step {seen[s]}")
        seen.setdefault(s, t)
        if t >= 1 and len(set(s) & set(sched.path[t - 1])) != sched.d - 1:
            fail(t, "not adjacent to previous vertex")
        if require_two_step and t >= 2 and len(set(s) & set(sched.path[t - 2])) != 1:
            fail(t, "two-step overlap is not 1")
    if require_complete and len(sched.path) != comb(sched.n_cl, sched.d):
        fail(len(sched.path), f"path has {len(sched.path)} vertices, J(n,d) has "
                              f"{comb(sched.n_cl, sched.d)}")
    return report


def min_clock_qubits(steps: int, d: int = 2) -> int:
    """Smallest ``n_cl`` whose full clock has at least ``steps + 1`` time slots."""
    n = max(d + 1, 3 if d == 2 else d + 1)
    while comb(n, d) < steps + 1:
        n += 1
    return n


def clock_operator_dense(sched: ClockSchedule, desc: ClockTermDescriptor,
                         include_held: bool = True) -> np.ndarray:
    """Descriptor operator as a full ``2**n_cl`` matrix (small ``n_cl`` only)."""
    block, elements = desc.operator(include_held)
    sblock, support = sort_block(block, [e - 1 for e in elements])
    return embed_sparse(sblock, support, sched.n_cl).toarray()

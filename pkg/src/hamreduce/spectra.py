"""Exact spectral oracles for Hamiltonian specs at desk scale."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from .circuit import CzSandwichCircuit, Gate, QuantumCircuit
from .clock import ClockSchedule
from .errors import CapExceeded, HamreduceError, InputError, PromiseViolated
from .hamiltonian import HamiltonianSpec, legal_clock_isometry

DENSE_CAP = 14
ITERATIVE_CAP = 24
# Above this many qubits "auto" switches from dense eigh to the iterative solver.
AUTO_DENSE_LIMIT = 11
RESIDUAL_TOL = 1e-8
ZERO_TOL = 1e-9

YES = "YES"
NO = "NO"


class DimensionCapExceeded(CapExceeded):
    pass


class ConvergenceFailure(HamreduceError):
    pass


class HypothesisViolated(InputError):
    pass


@dataclass
class SpectrumResult:
    ground_energy: float
    ground_vector: np.ndarray | None
    method: str
    residual: float


@dataclass
class HistoryState:
    vector: np.ndarray
    circuit: QuantumCircuit
    schedule: ClockSchedule | None
    total_steps: int


@dataclass
class ProjectionReport:
    lambda_total: float
    lambda_restricted: float
    h1_norm: float
    gap: float
    gap_loss: float
    bound: float
    holds: bool


def _cap(spec: HamiltonianSpec, cap: int) -> None:
    if spec.total_qubits > cap:
        raise DimensionCapExceeded(f"{spec.total_qubits} qubits exceeds cap {cap}")


def realize_dense(spec: HamiltonianSpec, cap: int = DENSE_CAP) -> np.ndarray:
    _cap(spec, cap)
    if spec.is_diagonal:
        return np.diag(spec.diagonal()).astype(complex)
    return spec.to_sparse().toarray()


def realize_sparse(spec: HamiltonianSpec, cap: int = ITERATIVE_CAP) -> sp.csr_matrix:
    _cap(spec, cap)
    return spec.to_sparse()


def eigenvalues(spec: HamiltonianSpec, cap: int = DENSE_CAP) -> np.ndarray:
    """Full ascending spectrum."""
    _cap(spec, cap)
    if spec.is_diagonal:
        return np.sort(spec.diagonal())
    return np.linalg.eigvalsh(realize_dense(spec, cap))


def ground_energy(spec: HamiltonianSpec, method: str = "auto", dense_cap: int = DENSE_CAP,
                  iterative_cap: int = ITERATIVE_CAP, seed: int = 0,
                  tol: float = 1e-10) -> SpectrumResult:
    """Smallest eigenvalue with a residual certificate ``||Hv - lambda v||``.

    ``method`` is ``"auto"``, ``"dense"``, ``"iterative"`` or ``"diagonal"``.
    Diagonal specs are solved exactly from their diagonal.
    """
    if method == "auto":
        if spec.is_diagonal:
            method = "diagonal"
        elif spec.total_qubits <= min(dense_cap, AUTO_DENSE_LIMIT):
            method = "dense"
        else:
            method = "iterative"
    if method == "diagonal":
        _cap(spec, iterative_cap)
        if not spec.is_diagonal:
            raise InputError("spec is not diagonal")
        diag = spec.diagonal()
        i = int(np.argmin(diag))
        v = np.zeros(spec.dim, dtype=complex)
        v[i] = 1.0
        return SpectrumResult(float(diag[i]), v, "diagonal", 0.0)
    if method == "dense":
        h = realize_dense(spec, dense_cap)
        w, vecs = np.linalg.eigh(h)
        v = vecs[:, 0]
        return SpectrumResult(float(w[0]), v, "dense", float(np.linalg.norm(h @ v - w[0] * v)))
    if method != "iterative":
        raise InputError(f"unknown method {method!r}")
    h = realize_sparse(spec, iterative_cap)
    if spec.dim <= 2:
        w, vecs = np.linalg.eigh(h.toarray())
        return SpectrumResult(float(w[0]), vecs[:, 0], "iterative", 0.0)
    v0 = np.random.default_rng(seed).standard_normal(spec.dim).astype(complex)
    try:
        w, vecs = eigsh(h, k=1, which="SA", v0=v0, tol=tol, maxiter=max(10000, 10 * spec.dim))
    except (ArpackNoConvergence, ArpackError) as exc:
        raise ConvergenceFailure(f"Lanczos did not converge: {exc}") from None
    v = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
    lam = float(w[0])
    residual = float(np.linalg.norm(h @ v - lam * v))
    scale = max(1.0, abs(lam), float(abs(h).sum(axis=1).max()))
    if residual > RESIDUAL_TOL * scale:
        raise ConvergenceFailure(f"residual {residual:.3e} above tolerance")
    return SpectrumResult(lam, v, "iterative", residual)


def partition_function_exact(spec: HamiltonianSpec, beta: float, cap: int = DENSE_CAP) -> float:
    """``tr exp(-beta H)`` from the full spectrum."""
    w = eigenvalues(spec, cap)
    return float(np.sum(np.exp(-beta * w)))


def _as_circuit(circ) -> QuantumCircuit:
    return circ.as_circuit() if isinstance(circ, CzSandwichCircuit) else circ


def history_state(circ: QuantumCircuit | CzSandwichCircuit, sched: ClockSchedule | int,
                  psi: np.ndarray, steps: int | None = None, cap: int = DENSE_CAP) -> HistoryState:
    """``sum_t (V_t..V_1 |psi>|0..0>) (x) |gamma_t> / sqrt(T+1)``.

    ``sched`` may be a clock schedule (Johnson-clock encoding) or an integer
    ``T`` for the abstract ``T+1``-dimensional clock.  ``steps`` defaults to
    the circuit length for CZ-sandwich circuits and to the full schedule
    otherwise; gates past the end of the circuit act as the identity.
    """
    from ._ops import apply_local

    qc = _as_circuit(circ)
    N = qc.num_qubits
    if steps is None:
        if isinstance(sched, int):
            steps = sched
        elif isinstance(circ, CzSandwichCircuit):
            steps = circ.total_steps
        else:
            steps = sched.total_steps
    n_cl = 0 if isinstance(sched, int) else sched.n_cl
    if N + n_cl > cap:
        raise DimensionCapExceeded(f"{N + n_cl} qubits exceeds cap {cap}")
    psi = np.asarray(psi, dtype=complex)
    if psi.size != 1 << qc.layout.num_in:
        raise InputError(f"input state has dimension {psi.size}, expected {1 << qc.layout.num_in}")
    anc = np.zeros(1 << qc.layout.num_anc, dtype=complex)
    anc[0] = 1.0
    state = np.kron(psi / np.linalg.norm(psi), anc)
    slices = np.zeros((1 << N, steps + 1), dtype=complex)
    slices[:, 0] = state
    for t in range(1, steps + 1):
        if t <= len(qc.gates):
            g: Gate = qc.gates[t - 1]
            state = apply_local(state, g.matrix(), g.qubits, N)
        slices[:, t] = state
    vec = slices.ravel() / np.sqrt(steps + 1)
    if not isinstance(sched, int):
        vec = legal_clock_isometry(N, sched, steps) @ vec
    return HistoryState(vec, qc, None if isinstance(sched, int) else sched, steps)


def rayleigh(spec: HamiltonianSpec, vec: np.ndarray) -> float:
    h = spec.to_sparse()
    return float(np.real(np.vdot(vec, h @ vec)) / np.real(np.vdot(vec, vec)))


def projection_lemma_check(h1: HamiltonianSpec, h2: HamiltonianSpec,
                           subspace: np.ndarray | sp.spmatrix | None = None,
                           cap: int = 12) -> ProjectionReport:
    """Compare ``lambda(H1+H2)`` with ``lambda(H1|_S) - ||H1||^2/(J - 2||H1||)``.

    ``S`` is the zero eigenspace of ``H2`` and ``J`` its smallest nonzero
    eigenvalue.  When ``subspace`` is given it must span exactly that space.
    """
    _cap(h1, cap)
    if h1.total_qubits != h2.total_qubits:
        raise InputError("h1 and h2 act on different registers")
    m1 = realize_dense(h1, cap)
    m2 = realize_dense(h2, cap)
    w2, v2 = np.linalg.eigh(m2)
    scale = max(1.0, float(np.max(np.abs(w2))))
    zero = np.abs(w2) <= ZERO_TOL * scale
    if np.any(w2 < -ZERO_TOL * scale):
        raise HypothesisViolated("H2 is not positive semidefinite")
    if not np.any(zero) or np.all(zero):
        raise HypothesisViolated("H2 needs both a zero eigenspace and a nonzero eigenvalue")
    gap = float(np.min(w2[~zero]))
    if subspace is None:
        basis = v2[:, zero]
    else:
        basis = subspace.toarray() if sp.issparse(subspace) else np.asarray(subspace)
        if basis.shape[1] != int(np.sum(zero)):
            raise HypothesisViolated(
                f"subspace has dimension {basis.shape[1]}, kernel of H2 has {int(np.sum(zero))}")
        if np.linalg.norm(m2 @ basis) > ZERO_TOL * scale * max(1, basis.shape[1]):
            raise HypothesisViolated("subspace is not annihilated by H2")
    h1_norm = float(np.max(np.abs(np.linalg.eigvalsh(m1))))
    if gap <= 2 * h1_norm:
        raise HypothesisViolated(f"J={gap:.4g} is not larger than 2||H1||={2 * h1_norm:.4g}")
    restricted = basis.conj().T @ m1 @ basis
    lam_s = float(np.linalg.eigvalsh(restricted)[0])
    lam = float(np.linalg.eigvalsh(m1 + m2)[0])
    loss = h1_norm ** 2 / (gap - 2 * h1_norm)
    bound = lam_s - loss
    tol = 1e-9 * scale
    return ProjectionReport(lam, lam_s, h1_norm, gap, loss, bound, lam >= bound - tol)


def decide_lh(spec: HamiltonianSpec, a: float, b: float, **kwargs) -> str:
    """``YES`` if ``lambda <= a``, ``NO`` if ``lambda >= b``; otherwise the promise fails."""
    if not b > a:
        raise InputError(f"need b > a, got a={a}, b={b}")
    lam = ground_energy(spec, **kwargs).ground_energy
    if lam <= a:
        return YES
    if lam >= b:
        return NO
    raise PromiseViolated(f"lambda={lam:.6g} lies strictly between a={a:.6g} and b={b:.6g}")

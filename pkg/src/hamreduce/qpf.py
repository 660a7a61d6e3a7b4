"""Partition-function estimation by energy binning and quantum counting.

The energy range ``[0, 1)`` is cut into ``num_bins`` equal bins.  For each
bin the number of eigenstates it holds is estimated (exactly, with injected
noise, or by simulating quantum counting), and

    z_half = 1/2 * sum_j M_j * exp(-(j-1) * beta / num_bins)

is reported.  Phase estimation follows the textbook circuit: control
register in ``|+>``, controlled ``U**(2**(l-k))`` from control ``k`` (control 1
is the most significant bit) and an inverse QFT; outcome ``x`` means phase
``2*pi*x/2**l``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.stats import binom

from .errors import CapExceeded, InputError, PromiseViolated
from .hamiltonian import HamiltonianSpec
from .spectra import YES, NO, eigenvalues, partition_function_exact, realize_dense

STATEVECTOR_CAP = 14
UNITARY_TOL = 1e-10
EIGVEC_TOL = 1e-9
DEFAULT_TAU = math.pi
DEFAULT_ETA = 1e-4


class NormalizationViolated(InputError):
    pass


class NotUnitary(InputError):
    pass


class NotEigenvector(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class DeltaTooSmall(InputError):
    pass


class ThresholdsOverlap(InputError):
    pass


@dataclass(frozen=True)
class EnergyBins:
    num_bins: int
    beta: float

    def __post_init__(self):
        if self.num_bins < 1:
            raise InputError("num_bins must be >= 1")

    @property
    def delta(self) -> float:
        return self.beta / self.num_bins

    @property
    def width(self) -> float:
        return 1.0 / self.num_bins

    def edges(self, j: int) -> tuple[float, float]:
        """``[(j-1)/num_bins, j/num_bins)`` for 1-based ``j``."""
        return (j - 1) / self.num_bins, j / self.num_bins


@dataclass
class CountEstimate:
    bin_index: int
    m_tilde: float
    mode: str
    ell: int | None = None
    reps: int | None = None
    success_fraction: float | None = None
    amplitude: float | None = None


@dataclass
class QpfEstimate:
    z_tilde_half: float
    bins: list[CountEstimate]
    relative_error_target: float | None = None
    exact_z: float | None = None

    @property
    def ratio(self) -> float | None:
        if self.exact_z is None:
            return None
        return self.z_tilde_half / self.exact_z


@dataclass
class PhaseEstimateRun:
    ell: int
    reps: int
    samples: np.ndarray
    theta_tilde: float


# --------------------------------------------------------------------------
# energy binning


def _checked_spectrum(spec: HamiltonianSpec, cap: int) -> np.ndarray:
    w = eigenvalues(spec, cap)
    if w[0] < -1e-12:
        raise NormalizationViolated(f"spec has negative eigenvalue {w[0]:.3e}")
    if w[-1] >= 1:
        raise NormalizationViolated(f"spec norm {w[-1]:.6g} is not below 1")
    return np.clip(w, 0.0, None)


def bin_index_of(energies: np.ndarray, bins: EnergyBins) -> np.ndarray:
    """0-based bin index of each energy in ``[0, 1)``."""
    idx = np.floor(np.asarray(energies) * bins.num_bins).astype(np.int64)
    return np.clip(idx, 0, bins.num_bins - 1)


def bin_counts_exact(spec: HamiltonianSpec, bins: EnergyBins, cap: int = 12) -> list[int]:
    w = _checked_spectrum(spec, cap)
    return np.bincount(bin_index_of(w, bins), minlength=bins.num_bins).tolist()


def widened_counts(energies: np.ndarray, bins: EnergyBins, low: float, high: float) -> np.ndarray:
    """Eigenstates in ``[(j-1)/T - low, j/T + high)`` for every bin ``j``."""
    out = np.zeros(bins.num_bins, dtype=np.int64)
    for j in range(1, bins.num_bins + 1):
        lo, hi = bins.edges(j)
        out[j - 1] = int(np.sum((energies >= lo - low) & (energies < hi + high)))
    return out


def estimate_z_from_counts(counts, bins: EnergyBins, delta: float | None = None) -> QpfEstimate:
    counts = np.asarray(counts, dtype=float)
    if counts.shape != (bins.num_bins,):
        raise InputError(f"expected {bins.num_bins} counts, got {counts.shape}")
    weights = np.exp(-np.arange(bins.num_bins) * bins.delta)
    z_half = 0.5 * float(np.dot(counts, weights))
    est = [CountEstimate(j + 1, float(m), "exact") for j, m in enumerate(counts)]
    return QpfEstimate(z_half, est, delta)


# --------------------------------------------------------------------------
# phase estimation


def _check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NotUnitary("operator must be square")
    if np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0])) > UNITARY_TOL * max(1, u.shape[0]):
        raise NotUnitary("operator is not unitary")
    return u


def pe_distribution(u: np.ndarray, state: np.ndarray, ell: int,
                    cap: int = STATEVECTOR_CAP) -> np.ndarray:
    """Outcome distribution of the phase-estimation circuit, by statevector simulation.

    ``state`` need not be an eigenvector.
    """
    u = np.asarray(u, dtype=complex)
    dim = u.shape[0]
    if (1 << ell) * dim > 1 << cap:
        raise CapExceeded(f"{ell} control qubits with a {dim}-dim system exceeds the cap")
    state = np.asarray(state, dtype=complex)
    if state.shape != (dim,):
        raise DimensionMismatch(f"state has shape {state.shape}, operator is {dim}x{dim}")
    psi = np.tile(state / np.linalg.norm(state), (1 << ell, 1)) / math.sqrt(1 << ell)
    x = np.arange(1 << ell)
    power = u
    # control k (1-based, k=1 most significant) applies U**(2**(ell-k)); go from k=ell upward
    for k in range(ell, 0, -1):
        rows = ((x >> (ell - k)) & 1).astype(bool)
        psi[rows] = psi[rows] @ power.T
        power = power @ power
    amp = np.fft.fft(psi, axis=0, norm="ortho")
    probs = np.sum(np.abs(amp) ** 2, axis=1)
    return probs / probs.sum()


def pe_closed_form(theta: float, ell: int) -> np.ndarray:
    """``Pr[x]`` for an eigenvector with phase ``theta``."""
    n = 1 << ell
    d = theta - 2 * math.pi * np.arange(n) / n
    half = np.sin(d / 2)
    exact = np.abs(half) < 1e-12
    p = np.where(exact, 1.0, np.sin(n * d / 2) ** 2 / (n * np.where(exact, 1.0, half)) ** 2)
    return p / p.sum()


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def phase_estimation(u: np.ndarray, eigvec: np.ndarray, ell: int, rng=None, size: int | None = None):
    """Sample ``theta~ = 2*pi*x/2**ell`` from the simulated circuit (one sample, or ``size``)."""
    u = _check_unitary(u)
    v = np.asarray(eigvec, dtype=complex)
    v = v / np.linalg.norm(v)
    lam = np.vdot(v, u @ v)
    if np.linalg.norm(u @ v - lam * v) > EIGVEC_TOL:
        raise NotEigenvector("state is not an eigenvector of the operator")
    probs = pe_distribution(u, v, ell)
    x = _rng(rng).choice(1 << ell, size=size, p=probs)
    return 2 * math.pi * x / (1 << ell)


def median_of_samples(samples: np.ndarray) -> int:
    """Lower median of integer samples."""
    s = np.sort(np.asarray(samples))
    return int(s[(len(s) - 1) // 2])


def median_amplified_pe(u: np.ndarray, eigvec: np.ndarray, ell: int, reps: int,
                        rng=None) -> PhaseEstimateRun:
    if reps < 1 or reps % 2 == 0:
        raise InputError(f"reps must be odd and positive, got {reps}")
    u = _check_unitary(u)
    v = np.asarray(eigvec, dtype=complex) / np.linalg.norm(eigvec)
    lam = np.vdot(v, u @ v)
    if np.linalg.norm(u @ v - lam * v) > EIGVEC_TOL:
        raise NotEigenvector("state is not an eigenvector of the operator")
    probs = pe_distribution(u, v, ell)
    samples = _rng(rng).choice(1 << ell, size=reps, p=probs)
    med = median_of_samples(samples)
    return PhaseEstimateRun(ell, reps, samples, 2 * math.pi * med / (1 << ell))


def median_distribution(probs: np.ndarray, reps: int) -> np.ndarray:
    """Distribution of the lower median of ``reps`` i.i.d. draws from ``probs``."""
    cdf = np.clip(np.cumsum(probs), 0.0, 1.0)
    need = (reps + 1) // 2
    # Pr[median <= y] = Pr[at least `need` draws <= y]
    cdf_med = binom.sf(need - 1, reps, cdf)
    out = np.diff(np.concatenate([[0.0], cdf_med]))
    out = np.clip(out, 0.0, None)
    return out / out.sum()


def fold(x: np.ndarray | int, ell: int):
    """Map outcome ``x`` to ``min(x, 2**ell - x)``, i.e. theta' to min(theta', 2pi - theta')."""
    n = 1 << ell
    x = np.asarray(x)
    return np.minimum(x, (n - x) % n)


# --------------------------------------------------------------------------
# counting


def grover_operator(u_mark: np.ndarray, psi: np.ndarray, flag: int = 0) -> np.ndarray:
    """``U (2|psi><psi| - I) U^dagger (I - 2 Pi_good)`` with good = flag qubit in ``|1>``.

    ``flag`` indexes a qubit of the register (0 = most significant).
    """
    u = np.asarray(u_mark, dtype=complex)
    psi = np.asarray(psi, dtype=complex)
    dim = u.shape[0]
    if u.shape != (dim, dim) or psi.shape != (dim,):
        raise DimensionMismatch(f"operator {u.shape} and state {psi.shape} do not match")
    if not np.isclose(np.linalg.norm(psi), 1.0, atol=1e-10):
        raise InputError("psi must have unit norm")
    nq = dim.bit_length() - 1
    if 1 << nq != dim:
        raise DimensionMismatch("dimension is not a power of two")
    good = ((np.arange(dim) >> (nq - 1 - flag)) & 1).astype(bool)
    s_good = np.where(good, -1.0, 1.0)
    refl = 2 * np.outer(psi, psi.conj()) - np.eye(dim)
    return (u @ refl @ u.conj().T) * s_good[None, :]


def marked_amplitude(u_mark: np.ndarray, psi: np.ndarray, flag: int = 0) -> float:
    """``|| Pi_good U |psi> ||^2``."""
    u = np.asarray(u_mark, dtype=complex)
    out = u @ np.asarray(psi, dtype=complex)
    nq = u.shape[0].bit_length() - 1
    good = ((np.arange(u.shape[0]) >> (nq - 1 - flag)) & 1).astype(bool)
    return float(np.sum(np.abs(out[good]) ** 2))


def counting_distribution_from_amplitude(a: float, ell: int) -> np.ndarray:
    """PE outcome distribution for ``G`` on ``U|psi>`` given the marked weight ``a``.

    ``U|psi>`` splits evenly over the eigenvectors with phases ``theta`` and
    ``2*pi - theta``, ``sin^2(theta/2) = a``; at ``a`` in {0, 1} it is a
    single eigenvector.
    """
    a = min(max(a, 0.0), 1.0)
    theta = 2 * math.asin(math.sqrt(a))
    if a < 1e-15 or a > 1 - 1e-15:
        return pe_closed_form(theta, ell)
    return 0.5 * (pe_closed_form(theta, ell) + pe_closed_form(2 * math.pi - theta, ell))


def counting_distribution(u_mark: np.ndarray, psi: np.ndarray, ell: int, method: str = "statevector",
                          flag: int = 0) -> np.ndarray:
    if method == "statevector":
        g = grover_operator(u_mark, psi, flag)
        start = np.asarray(u_mark, dtype=complex) @ np.asarray(psi, dtype=complex)
        return pe_distribution(g, start, ell)
    if method == "subspace":
        return counting_distribution_from_amplitude(marked_amplitude(u_mark, psi, flag), ell)
    raise InputError(f"unknown counting method {method!r}")


def folded_median_distribution(probs: np.ndarray, ell: int, reps: int) -> np.ndarray:
    """Distribution (over ``0..2**(ell-1)``) of the median of folded outcomes."""
    n = 1 << ell
    folded = np.zeros(n // 2 + 1)
    np.add.at(folded, fold(np.arange(n), ell), probs)
    return median_distribution(folded, reps)


def sample_count(probs: np.ndarray, ell: int, reps: int, n_count: float, rng) -> tuple[float, int]:
    """One counting run: fold each of ``reps`` outcomes, take the median, return (M~, x)."""
    rng = _rng(rng)
    x = rng.choice(1 << ell, size=reps, p=probs)
    med = median_of_samples(fold(x, ell))
    theta = 2 * math.pi * med / (1 << ell)
    return n_count * math.sin(theta / 2) ** 2, med


def quantum_counting(u_mark: np.ndarray, psi: np.ndarray, ell: int, reps: int, rng=None,
                     n_count: float | None = None, method: str = "statevector",
                     flag: int = 0) -> float:
    """``M~ = N sin^2(theta~/2)`` from ``reps`` phase estimates of the Grover operator.

    Each outcome is folded to ``min(theta', 2pi - theta')`` before the median
    is taken.  ``n_count`` defaults to half the register dimension.
    """
    if reps < 1 or reps % 2 == 0:
        raise InputError(f"reps must be odd and positive, got {reps}")
    if n_count is None:
        n_count = np.asarray(u_mark).shape[0] // 2
    probs = counting_distribution(u_mark, psi, ell, method, flag)
    return sample_count(probs, ell, reps, n_count, rng)[0]


def counting_error_bound(n: float, m: float, dtheta: float) -> float:
    """``(sqrt(2 N M) + N dtheta / 2) * dtheta``."""
    return (math.sqrt(2 * n * m) + n * dtheta / 2) * dtheta


def basis_marker(num_qubits: int, marked) -> tuple[np.ndarray, np.ndarray]:
    """Marker on (flag, system): flips the flag on the ``marked`` basis states.

    Returns the unitary and ``psi = |0>_flag |+...+>``.
    """
    dim = 1 << num_qubits
    marked = set(int(m) for m in marked)
    u = np.eye(2 * dim, dtype=complex)
    for m in marked:
        lo, hi = m, dim + m
        u[[lo, hi]] = u[[hi, lo]]
    psi = np.concatenate([np.ones(dim), np.zeros(dim)]).astype(complex) / math.sqrt(dim)
    return u, psi


def epr_counting_state(n: int, cap: int = STATEVECTOR_CAP) -> np.ndarray:
    """``sum_q |q>|q> / sqrt(2**n)`` on ``2n`` qubits."""
    if 2 * n > cap:
        raise CapExceeded(f"{2 * n} qubits exceeds the statevector cap {cap}")
    dim = 1 << n
    v = np.zeros(dim * dim, dtype=complex)
    v[np.arange(dim) * dim + np.arange(dim)] = 1.0
    return v / math.sqrt(dim)


# --------------------------------------------------------------------------
# interval marker


@dataclass(frozen=True)
class MarkerParams:
    """Energy-estimation settings: ``tau`` is the evolution time of ``exp(iH tau)``."""

    ell_ee: int
    reps_ee: int
    epsilon: float
    tau: float = DEFAULT_TAU


def default_marker_params(bins: EnergyBins, eta: float = DEFAULT_ETA,
                          tau: float = DEFAULT_TAU) -> MarkerParams:
    """``epsilon = width/8``; outcome accuracy ``epsilon/2`` with failure below ``eta``."""
    eps = bins.width / 8
    b = math.ceil(math.log2(2 * math.pi / (tau * eps / 2)))
    ell = b + 2
    # Chernoff for the median of reps draws, each failing with prob <= 1/4
    reps = 1
    while (4 * 0.25 * 0.75) ** (reps / 2) > eta:
        reps += 2
    return MarkerParams(ell, reps, eps, tau)


def decision_interval(bins: EnergyBins, j: int, epsilon: float) -> tuple[float, float]:
    lo, hi = bins.edges(j)
    return lo - epsilon / 2, hi + epsilon / 2


def _outcome_energies(ell: int, tau: float) -> np.ndarray:
    """Energy read off each outcome, phases taken in ``[-pi, pi)``."""
    n = 1 << ell
    x = np.arange(n)
    signed = np.where(x >= n // 2, x - n, x)
    return 2 * math.pi * signed / n / tau


def decision_mask(bins: EnergyBins, j: int, params: MarkerParams) -> np.ndarray:
    lo, hi = decision_interval(bins, j, params.epsilon)
    e = _outcome_energies(params.ell_ee, params.tau)
    return (e >= lo) & (e < hi)


def flag_probabilities(energies: np.ndarray, bins: EnergyBins, j: int,
                       params: MarkerParams) -> np.ndarray:
    """Per-eigenstate probability that ``U_j`` raises the flag.

    The energy estimate is the median of ``reps_ee`` phase estimates of
    ``exp(iH tau)``, computed coherently; for an eigenstate the outcomes are
    independent, so the median follows from binomial order statistics.
    """
    mask = decision_mask(bins, j, params)
    out = np.empty(len(energies))
    for p, e in enumerate(energies):
        probs = pe_closed_form(math.fmod(e * params.tau, 2 * math.pi), params.ell_ee)
        # median over the signed ordering so the wrap point sits at -pi
        n = 1 << params.ell_ee
        order = np.concatenate([np.arange(n // 2, n), np.arange(n // 2)])
        med = median_distribution(probs[order], params.reps_ee)
        out[p] = float(np.sum(med[mask[order]]))
    return out


def build_interval_marker(spec: HamiltonianSpec, bins: EnergyBins, j: int, ell_ee: int,
                          tau: float = DEFAULT_TAU, epsilon: float | None = None,
                          cap: int = 12) -> np.ndarray:
    """Dense ``U_j = U_dec U_EE`` on (flag, energy register, system).

    ``U_EE`` is one phase estimation of ``exp(iH tau)`` into ``ell_ee``
    qubits; ``U_dec`` flips the flag when the outcome's energy lies in the
    bin widened by ``epsilon/2`` on each side.
    """
    n = spec.total_qubits
    if 1 + ell_ee + n > cap:
        raise CapExceeded(f"{1 + ell_ee + n} qubits exceeds the marker cap {cap}")
    if epsilon is None:
        epsilon = bins.width / 8
    h = realize_dense(spec)
    w, v = np.linalg.eigh(h)
    dim = 1 << n
    ne = 1 << ell_ee
    # controlled powers: sum_x |x><x| (x) W**x with W = exp(i H tau)
    phases = np.exp(1j * tau * np.outer(np.arange(ne), w))
    blocks = [(v * phases[x]) @ v.conj().T for x in range(ne)]
    ctrl = np.zeros((ne * dim, ne * dim), dtype=complex)
    for x in range(ne):
        ctrl[x * dim:(x + 1) * dim, x * dim:(x + 1) * dim] = blocks[x]
    x = np.arange(ne)
    parity = np.array([[bin(a & b).count("1") & 1 for b in x] for a in x])
    had = np.where(parity == 1, -1.0, 1.0).astype(complex) / math.sqrt(ne)
    iqft = np.fft.fft(np.eye(ne), axis=0, norm="ortho")
    u_ee = np.kron(iqft, np.eye(dim)) @ ctrl @ np.kron(had, np.eye(dim))
    params = MarkerParams(ell_ee, 1, epsilon, tau)
    mask = decision_mask(bins, j, params)
    perm = np.arange(2 * ne * dim)
    flagged = np.repeat(mask, dim)
    idx = np.nonzero(flagged)[0]
    perm[idx], perm[ne * dim + idx] = ne * dim + idx, idx
    u_dec = np.eye(2 * ne * dim, dtype=complex)[perm]
    return u_dec @ np.kron(np.eye(2), u_ee)


# --------------------------------------------------------------------------
# the algorithm


@dataclass(frozen=True)
class QpfConfig:
    num_bins: int | None = None
    noise: bool = True
    ell_count: int | None = None
    reps_count: int = 9
    eta: float = DEFAULT_ETA
    tau: float = DEFAULT_TAU
    c: float = 1.0


def min_delta(n: int, c: float = 1.0) -> float:
    return 0.5 + 1.0 / n ** c


def qpf_algorithm(spec: HamiltonianSpec, beta: float, delta: float, backend: str = "ideal",
                  rng=None, config: QpfConfig = QpfConfig(), cap: int = 12) -> QpfEstimate:
    """Estimate ``Z/2`` for a PSD spec with ``||H|| < 1``.

    ``ideal``: exact bin counts, each scaled by a uniform factor in
    ``1 +- 1/(4 n^c)`` when ``config.noise``.  ``simulated``: every bin is
    counted by simulated quantum counting of the interval marker applied to
    half of a ``2N``-dimensional maximally entangled state.
    """
    n = spec.total_qubits
    if n < 1:
        raise InputError("spec must act on at least one qubit")
    if delta < min_delta(n, config.c):
        raise DeltaTooSmall(f"delta={delta} below 1/2 + 1/n^c = {min_delta(n, config.c):.4g}")
    rng = _rng(rng)
    num_bins = config.num_bins or int(math.ceil(4 * n ** config.c))
    bins = EnergyBins(num_bins, beta)
    w = _checked_spectrum(spec, cap)
    exact = float(np.sum(np.exp(-beta * w)))
    if backend == "ideal":
        counts = np.bincount(bin_index_of(w, bins), minlength=num_bins).astype(float)
        if config.noise:
            band = 1.0 / (4 * n ** config.c)
            counts = counts * (1 + rng.uniform(-band, band, size=num_bins))
        est = estimate_z_from_counts(counts, bins, delta)
        for b_ in est.bins:
            b_.mode = "exact"
    elif backend == "simulated":
        N = 1 << n
        params = default_marker_params(bins, config.eta, config.tau)
        ell_c = config.ell_count or int(math.ceil(n / 2 + math.log2(max(n, 2)))) + 6
        if ell_c > 20:
            raise CapExceeded(f"counting register of {ell_c} qubits exceeds the cap")
        estimates = []
        for j in range(1, num_bins + 1):
            p_flag = flag_probabilities(w, bins, j, params)
            a = float(np.sum(p_flag)) / (2 * N)
            probs = counting_distribution_from_amplitude(a, ell_c)
            m_tilde, _ = sample_count(probs, ell_c, config.reps_count, 2 * N, rng)
            estimates.append(CountEstimate(j, m_tilde, "simulated", ell_c, config.reps_count,
                                           None, a))
        est = estimate_z_from_counts([e.m_tilde for e in estimates], bins, delta)
        est.bins = estimates
    else:
        raise InputError(f"unknown backend {backend!r}")
    est.exact_z = exact
    return est


def exact_z_oracle(spec: HamiltonianSpec, beta: float, delta: float) -> float:
    return partition_function_exact(spec, beta)


def lh_reduction_parameters(n: int, a: float, b: float) -> tuple[float, float]:
    """``beta_0 = n/(b-a)`` and ``delta_0`` solving ``(1-d)/(1+d) = exp(-0.3 n)``."""
    if not b > a:
        raise InputError(f"need b > a, got a={a}, b={b}")
    return n / (b - a), math.tanh(0.15 * n)


def thresholds_overlap(n: int, a: float, b: float, beta: float, delta: float) -> bool:
    """``(1-delta) e^{-beta a} <= (1+delta) e^{-beta b + 0.7 n}``, compared in log space."""
    if delta >= 1:
        return True
    return math.log1p(-delta) - beta * a <= math.log1p(delta) - beta * b + 0.7 * n


def decide_lh_via_qpf(qpf_oracle: Callable[[HamiltonianSpec, float, float], float],
                      spec: HamiltonianSpec, a: float, b: float, beta: float | None = None,
                      delta: float | None = None) -> str:
    """Decide ``lambda <= a`` vs ``lambda >= b`` from one partition-function estimate.

    Defaults: ``beta = n/(b-a)`` and ``delta`` half the largest admissible value.
    """
    n = spec.total_qubits
    beta0, delta0 = lh_reduction_parameters(n, a, b)
    beta = beta0 if beta is None else beta
    delta = delta0 / 2 if delta is None else delta
    if thresholds_overlap(n, a, b, beta, delta):
        raise ThresholdsOverlap(
            f"(1-delta)e^(-beta a) <= (1+delta)e^(-beta b + 0.7n) at beta={beta:.4g}, delta={delta:.4g}")
    z = float(qpf_oracle(spec, beta, delta))
    if z < 0:
        raise InputError("oracle returned a negative estimate")
    log_z = -math.inf if z == 0 else math.log(z)
    if log_z >= math.log1p(-delta) - beta * a:
        return YES
    if log_z <= math.log1p(delta) - beta * b + 0.7 * n:
        return NO
    raise PromiseViolated("estimate falls between the YES and NO thresholds")

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import unitary_group

from hamreduce.cnf import CnfFormula, brute_force_min_violations, random_kcnf
from hamreduce.hamiltonian import HamiltonianSpec, LocalTerm, build_trivial_sat_hamiltonian
from hamreduce.qpf import (DeltaTooSmall, DimensionMismatch, EnergyBins, MarkerParams,
                           NormalizationViolated, NotEigenvector, NotUnitary, QpfConfig,
                           ThresholdsOverlap, basis_marker, bin_counts_exact,
                           build_interval_marker, counting_distribution, counting_error_bound,
                           decide_lh_via_qpf, default_marker_params, epr_counting_state,
                           estimate_z_from_counts, exact_z_oracle, flag_probabilities, fold,
                           grover_operator, median_amplified_pe, median_distribution,
                           pe_closed_form, pe_distribution, phase_estimation, qpf_algorithm,
                           quantum_counting, thresholds_overlap)
from hamreduce.spectra import NO, YES, eigenvalues, partition_function_exact

P1 = np.diag([0, 1]).astype(complex)


def psd_spec(n, rng, norm=0.9):
    terms = []
    for _ in range(2 * n):
        k = int(rng.integers(1, min(3, n) + 1))
        sup = tuple(sorted(rng.choice(n, size=k, replace=False)))
        a = rng.standard_normal((1 << k, 1 << k)) + 1j * rng.standard_normal((1 << k, 1 << k))
        terms.append(LocalTerm(1.0, sup, a @ a.conj().T))
    raw = HamiltonianSpec(n, tuple(terms), 3)
    w = eigenvalues(raw)
    shift = LocalTerm(-w[0], (), np.eye(1, dtype=complex))
    return HamiltonianSpec(n, raw.terms + (shift,), 3).scaled(norm / (w[-1] - w[0]))


def phase_gate(theta):
    return np.diag([1, np.exp(1j * theta)])


# --------------------------------------------------------------------------
# binning and estimator


def test_bins():
    b = EnergyBins(4, 2.0)
    assert b.delta * b.num_bins == pytest.approx(2.0, abs=1e-12)
    assert b.edges(2) == (0.25, 0.5)


def test_bin_counts_examples():
    assert bin_counts_exact(HamiltonianSpec(2, (), 0), EnergyBins(4, 1)) == [4, 0, 0, 0]
    spec = HamiltonianSpec(1, (LocalTerm(0.6, (0,), P1),), 1)
    assert bin_counts_exact(spec, EnergyBins(2, 1)) == [1, 1]
    assert sum(bin_counts_exact(psd_spec(6, np.random.default_rng(0)), EnergyBins(8, 1))) == 64


def test_bin_counts_normalization():
    with pytest.raises(NormalizationViolated):
        bin_counts_exact(HamiltonianSpec(1, (LocalTerm(-0.1, (0,), P1),), 1), EnergyBins(2, 1))
    with pytest.raises(NormalizationViolated):
        bin_counts_exact(HamiltonianSpec(1, (LocalTerm(1.0, (0,), P1),), 1), EnergyBins(2, 1))


def test_estimator_examples():
    bins = EnergyBins(4, 1.0)
    assert estimate_z_from_counts([8, 0, 0, 0], bins).z_tilde_half == 4
    assert estimate_z_from_counts([0, 0, 0, 0], bins).z_tilde_half == 0


def test_estimator_band_at_corners():
    rng = np.random.default_rng(3)
    n = 6
    spec = psd_spec(n, rng)
    z = partition_function_exact(spec, 1.0)
    bins = EnergyBins(4 * n, 1.0)
    counts = np.array(bin_counts_exact(spec, bins), dtype=float)
    band = 1 / (4 * n)
    for sign in (-1, 1):
        for pattern in range(8):
            signs = np.where((np.arange(bins.num_bins) + pattern) % 2 == 0, sign, -sign)
            est = estimate_z_from_counts(counts * (1 + band * signs), bins).z_tilde_half
            assert abs(est / z - 1) <= 0.5 + 1 / n


# --------------------------------------------------------------------------
# phase estimation


def test_pe_representable():
    dist = pe_distribution(np.diag([1, -1]), np.array([0, 1]), 3)
    assert dist[4] == pytest.approx(1)
    theta = phase_estimation(np.diag([1, -1]), np.array([0, 1]), 3, rng=0)
    assert theta == pytest.approx(math.pi)


def test_pe_one_control_closed_form():
    dist = pe_distribution(phase_gate(math.pi / 4), np.array([0, 1]), 1)
    expect = [math.cos(math.pi / 8) ** 2, math.sin(math.pi / 8) ** 2]
    assert np.allclose(dist, expect)


@pytest.mark.parametrize("theta, ell", [(0.7, 4), (2.9, 5), (5.5, 3)])
def test_pe_statevector_matches_closed_form(theta, ell):
    dist = pe_distribution(phase_gate(theta), np.array([0, 1]), ell)
    assert np.allclose(dist, pe_closed_form(theta, ell), atol=1e-12)


def test_pe_errors():
    with pytest.raises(NotUnitary):
        phase_estimation(np.array([[1, 1], [0, 1]]), np.array([1, 0]), 3)
    with pytest.raises(NotEigenvector):
        phase_estimation(np.array([[0, 1], [1, 0]]), np.array([1, 0]), 3)


def test_pe_tail_ell6_b4():
    theta = 2 * math.pi * 0.3141
    samples = phase_estimation(phase_gate(theta), np.array([0, 1]), 6, rng=1, size=10_000)
    diff = np.abs(np.angle(np.exp(1j * (samples - theta))))
    tail = np.mean(diff > 2 * math.pi / 2 ** 4)
    p = 1 / 4
    assert tail <= p + 3 * math.sqrt(p * (1 - p) / 10_000)


def test_median_pe():
    run = median_amplified_pe(np.diag([1, -1]), np.array([0, 1]), 3, 5, rng=0)
    assert run.theta_tilde == pytest.approx(math.pi)
    with pytest.raises(Exception):
        median_amplified_pe(np.diag([1, -1]), np.array([0, 1]), 3, 4)


def test_median_failure_decreases_with_reps():
    theta = 2 * math.pi * 0.37
    x = 2 * math.pi * np.arange(32) / 32
    bad = np.abs(np.angle(np.exp(1j * (x - theta)))) > 2 * math.pi / 2 ** 3
    probs = pe_distribution(phase_gate(theta), np.array([0, 1]), 5)
    exact = [median_distribution(probs, r)[bad].sum() for r in (1, 5, 15)]
    assert exact[0] > exact[1] > exact[2]
    rng = np.random.default_rng(4)
    rates = []
    for reps in (1, 5, 15):
        fails = 0
        for _ in range(1000):
            run = median_amplified_pe(phase_gate(theta), np.array([0, 1]), 5, reps, rng)
            err = abs(np.angle(np.exp(1j * (run.theta_tilde - theta))))
            fails += err > 2 * math.pi / 2 ** 3
        rates.append(fails / 1000)
    assert rates[0] > 0 and rates[0] >= rates[1] >= rates[2]


def test_median_distribution_matches_monte_carlo():
    probs = np.array([0.1, 0.5, 0.2, 0.2])
    exact = median_distribution(probs, 5)
    draws = np.random.default_rng(0).choice(4, size=(20000, 5), p=probs)
    emp = np.bincount(np.sort(draws, axis=1)[:, 2], minlength=4) / 20000
    assert np.allclose(exact, emp, atol=0.015)


def test_fold():
    assert list(fold(np.arange(8), 3)) == [0, 1, 2, 3, 4, 3, 2, 1]


# --------------------------------------------------------------------------
# counting


def test_grover_restricted_phase():
    u, psi = basis_marker(3, [0, 5])
    g = grover_operator(u, psi)
    v = u @ psi
    basis, _ = np.linalg.qr(np.stack([v, g @ v], axis=1))
    phases = np.abs(np.angle(np.linalg.eigvals(basis.conj().T @ g @ basis)))
    assert np.allclose(np.sin(phases / 2), 0.5)


def test_grover_extremes():
    u, psi = basis_marker(2, [])
    assert np.allclose(grover_operator(u, psi) @ (u @ psi), u @ psi)
    u, psi = basis_marker(2, range(4))
    g = grover_operator(u, psi)
    assert np.allclose(g @ (u @ psi), -(u @ psi))


def test_grover_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        grover_operator(np.eye(4), np.ones(2) / math.sqrt(2))


@pytest.mark.parametrize("m", range(9))
def test_counting_statevector_matches_subspace(m):
    u, psi = basis_marker(3, range(m))
    a = counting_distribution(u, psi, 7, "statevector")
    b = counting_distribution(u, psi, 7, "subspace")
    assert np.allclose(a, b, atol=1e-10)


def test_counting_extremes():
    u, psi = basis_marker(3, [])
    assert quantum_counting(u, psi, 6, 3, rng=0) == 0
    u, psi = basis_marker(3, range(8))
    assert quantum_counting(u, psi, 6, 3, rng=0) == pytest.approx(8)


def test_counting_m3_bound():
    u, psi = basis_marker(3, [1, 4, 6])
    bound = counting_error_bound(8, 3, 2 * math.pi / 2 ** 6)
    for seed in range(20):
        assert abs(quantum_counting(u, psi, 8, 9, rng=seed) - 3) < bound


def test_epr_state():
    assert np.allclose(epr_counting_state(1), np.array([1, 0, 0, 1]) / math.sqrt(2))
    v = unitary_group.rvs(4, random_state=2)
    alt = sum(np.kron(v[:, p], v[:, p].conj()) for p in range(4)) / 2
    assert np.allclose(alt, epr_counting_state(2), atol=1e-12)
    assert np.linalg.norm(epr_counting_state(3)) == pytest.approx(1)


# --------------------------------------------------------------------------
# interval marker


def diag_spec(energies):
    n = int(math.log2(len(energies)))
    return HamiltonianSpec(n, (LocalTerm(1.0, tuple(range(n)), np.diag(energies).astype(complex)),), n)


def flag_mass(u, state, ne, dim):
    out = u @ np.kron(np.array([1, 0]), np.kron(np.eye(ne)[0], state))
    return float(np.sum(np.abs(out[ne * dim:]) ** 2))


def test_marker_representable_energy_flags():
    spec = diag_spec([0.25, 0.75])
    bins = EnergyBins(4, 1.0)
    u = build_interval_marker(spec, bins, 2, 4)
    assert np.allclose(u.conj().T @ u, np.eye(len(u)), atol=1e-10)
    assert flag_mass(u, np.array([1, 0]), 16, 2) == pytest.approx(1)
    assert flag_mass(u, np.array([0, 1]), 16, 2) == pytest.approx(0, abs=1e-12)


def test_marker_far_energy_tail():
    bins = EnergyBins(4, 1.0)
    params = default_marker_params(bins)
    p = flag_probabilities(np.array([0.9, 0.62]), bins, 1, params)
    assert np.all(p <= 1e-4)


def test_dense_marker_matches_eigenbasis():
    spec = HamiltonianSpec(1, (LocalTerm(0.3, (0,), P1),
                               LocalTerm(0.1, (0,), np.array([[0, 1], [1, 0]], dtype=complex)),
                               LocalTerm(0.15, (), np.eye(1, dtype=complex))), 1)
    bins = EnergyBins(4, 1.0)
    w = eigenvalues(spec)
    for j in range(1, 5):
        u = build_interval_marker(spec, bins, j, 5)
        total = sum(flag_mass(u, np.eye(2)[q], 32, 2) for q in range(2))
        pf = flag_probabilities(w, bins, j, MarkerParams(5, 1, bins.width / 8))
        assert total == pytest.approx(pf.sum(), abs=1e-10)


def test_marker_on_epr_sandwich():
    rng = np.random.default_rng(9)
    spec = psd_spec(2, rng)
    bins = EnergyBins(8, 1.0)
    params = default_marker_params(bins)
    w = eigenvalues(spec)
    N = 4
    for j in range(1, 9):
        lo, hi = bins.edges(j)
        inside = np.sum((w >= lo) & (w < hi))
        widened = np.sum((w >= lo - params.epsilon) & (w < hi + params.epsilon))
        a = flag_probabilities(w, bins, j, params).sum() / (2 * N)
        assert inside / (2 * N) * (1 - 1e-3) <= a <= widened / (2 * N) + 1e-3


# --------------------------------------------------------------------------
# algorithm


def test_qpf_zero_hamiltonian():
    est = qpf_algorithm(HamiltonianSpec(3, (), 0), 1.0, 0.9, "ideal", rng=0,
                        config=QpfConfig(noise=False))
    assert est.z_tilde_half == 4 and est.ratio == 0.5


def test_qpf_exact_counts_ratio():
    spec = psd_spec(5, np.random.default_rng(1))
    est = qpf_algorithm(spec, 1.0, 0.8, "ideal", rng=0, config=QpfConfig(noise=False))
    assert 0.5 <= est.ratio <= 1.0 + 1e-12


def test_qpf_delta_too_small():
    with pytest.raises(DeltaTooSmall):
        qpf_algorithm(HamiltonianSpec(2, (), 0), 1.0, 0.6, "ideal")


def test_qpf_simulated_band():
    spec = psd_spec(2, np.random.default_rng(2))
    delta = 0.5 + 1 / 2
    hits = 0
    for seed in range(20):
        est = qpf_algorithm(spec, 1.0, delta, "simulated", rng=seed)
        hits += abs(est.ratio - 1) <= delta
    assert hits >= 19


def test_lh_via_qpf_trivial_sat():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(3, 9))
        phi = random_kcnf(n, int(rng.integers(1, 3 * n)), 3, rng)
        spec = build_trivial_sat_hamiltonian(phi)
        a, b = spec.thresholds.a, spec.thresholds.b
        expect = YES if brute_force_min_violations(phi)[0] == 0 else NO
        assert decide_lh_via_qpf(exact_z_oracle, spec, a, b) == expect


def test_lh_via_qpf_overlap():
    spec = build_trivial_sat_hamiltonian(CnfFormula.from_lists(3, [[1]]))
    assert thresholds_overlap(3, 0.3, 0.7, 0.1, 0.5)
    with pytest.raises(ThresholdsOverlap):
        decide_lh_via_qpf(exact_z_oracle, spec, 0.3, 0.7, beta=0.1)

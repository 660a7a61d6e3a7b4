import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hamreduce.circuit import CNOT, HADAMARD, NOT, Gate, circuit_from_gates
from hamreduce.clock import johnson_path_d2
from hamreduce.cnf import CnfFormula, random_kcnf
from hamreduce.errors import PromiseViolated
from hamreduce.hamiltonian import (HamiltonianSpec, LocalTerm, build_hu_5local,
                                   build_restricted_prop, build_trivial_sat_hamiltonian,
                                   legal_clock_isometry)
from hamreduce.spectra import (NO, YES, DimensionCapExceeded, HypothesisViolated, decide_lh,
                               eigenvalues, ground_energy, history_state,
                               partition_function_exact, projection_lemma_check, realize_dense)

P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)


def random_spec(n, num_terms, rng, locality=2):
    terms = []
    for _ in range(num_terms):
        k = int(rng.integers(1, locality + 1))
        sup = tuple(sorted(rng.choice(n, size=k, replace=False)))
        a = rng.standard_normal((1 << k, 1 << k)) + 1j * rng.standard_normal((1 << k, 1 << k))
        terms.append(LocalTerm(float(rng.uniform(0.1, 1)), sup, (a + a.conj().T) / 2))
    return HamiltonianSpec(n, tuple(terms), locality)


def test_embedding_order():
    spec = HamiltonianSpec(2, (LocalTerm(1.0, (0,), np.eye(2) - P0),), 1)
    assert np.allclose(realize_dense(spec), np.diag([0, 0, 1, 1]))


def test_trivial_two_clauses_diagonal():
    spec = build_trivial_sat_hamiltonian(CnfFormula.from_lists(2, [[1], [2]]))
    assert np.allclose(realize_dense(spec).diagonal(), [2, 1, 1, 0])


def test_zero_hamiltonian():
    spec = HamiltonianSpec(3, (), 0)
    assert ground_energy(spec).ground_energy == 0
    assert partition_function_exact(spec, 1.3) == 8


def test_partition_function_ln2():
    spec = HamiltonianSpec(1, (LocalTerm(1.0, (0,), P1),), 1)
    assert np.isclose(partition_function_exact(spec, np.log(2)), 1.5)


def test_partition_function_beta_zero_and_monotone():
    rng = np.random.default_rng(2)
    spec = random_spec(4, 6, rng)
    w0 = eigenvalues(spec)[0]
    spec = HamiltonianSpec(4, spec.terms + (LocalTerm(-w0, (), np.eye(1, dtype=complex)),), 2)
    assert np.isclose(partition_function_exact(spec, 0.0), 16)
    zs = [partition_function_exact(spec, b) for b in np.linspace(0, 3, 10)]
    assert all(x >= y for x, y in zip(zs, zs[1:]))


@settings(max_examples=15, deadline=None)
@given(st.integers(2, 8), st.integers(0, 10**6))
def test_dense_and_iterative_agree(n, seed):
    spec = random_spec(n, 2 * n, np.random.default_rng(seed))
    d = ground_energy(spec, method="dense")
    it = ground_energy(spec, method="iterative")
    assert abs(d.ground_energy - it.ground_energy) < 1e-7
    assert it.residual <= 1e-8 * max(1, spec.norm_bound())


def test_caps():
    spec = HamiltonianSpec(15, (LocalTerm(1.0, (0,), P1),), 1)
    with pytest.raises(DimensionCapExceeded):
        realize_dense(spec)
    with pytest.raises(DimensionCapExceeded):
        ground_energy(HamiltonianSpec(25, (LocalTerm(1.0, (0, 1), np.kron(P1, P0)),), 2),
                      method="iterative")


def test_diagonal_fast_path_large():
    phi = random_kcnf(18, 40, 3, np.random.default_rng(0))
    res = ground_energy(build_trivial_sat_hamiltonian(phi))
    assert res.method == "diagonal" and res.residual == 0


def test_decide_lh():
    sat = build_trivial_sat_hamiltonian(CnfFormula.from_lists(3, [[1, 2], [-3]]))
    assert decide_lh(sat, 1 / 3, 2 / 3) == YES
    unsat = build_trivial_sat_hamiltonian(CnfFormula.from_lists(3, [[1], [-1]]))
    assert decide_lh(unsat, 1 / 3, 2 / 3) == NO
    mid = HamiltonianSpec(1, (LocalTerm(0.5, (), np.eye(1, dtype=complex)),), 0)
    with pytest.raises(PromiseViolated):
        decide_lh(mid, 0.25, 0.75)


def test_history_state_examples():
    ident = circuit_from_gates(1, 0, 0, [])
    h = history_state(ident, 1, np.array([1, 0])).vector
    assert np.allclose(h, np.array([1, 1, 0, 0]) / np.sqrt(2))
    notc = circuit_from_gates(1, 0, 0, [Gate(NOT, (), (0,))])
    h = history_state(notc, 1, np.array([1, 0])).vector
    assert np.allclose(h, np.array([1, 0, 0, 1]) / np.sqrt(2))


def test_history_state_annihilated_by_restricted_prop():
    circ = circuit_from_gates(2, 1, 2, [Gate(HADAMARD, (), (0,)), Gate(CNOT, (0,), (2,)),
                                        Gate(HADAMARD, (), (1,))])
    rng = np.random.default_rng(5)
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    T = 5
    h = history_state(circ, T, psi).vector
    assert abs(np.linalg.norm(h) - 1) < 1e-12
    assert np.linalg.norm(build_restricted_prop(circ, T).h_prop @ h) < 1e-9


def test_history_state_lives_in_legal_subspace():
    circ = circuit_from_gates(1, 1, 1, [Gate(HADAMARD, (), (0,)), Gate(CNOT, (0,), (1,))])
    sched = johnson_path_d2(4)
    h = history_state(circ, sched, np.array([1, 0])).vector
    iso = legal_clock_isometry(2, sched)
    assert np.allclose(iso @ (iso.conj().T @ h), h)
    spec = build_hu_5local(circ, sched)
    mu = spec.metadata["mu"]
    # the circuit accepts |0> with probability 1/2
    from hamreduce.spectra import rayleigh
    val = rayleigh(spec, h)
    assert np.isclose(val, 0.5 / (sched.total_steps + 1))
    assert mu > 0


def test_projection_lemma_trivial_h1():
    h2 = HamiltonianSpec(2, (LocalTerm(1.0, (0,), P1),), 1)
    rep = projection_lemma_check(HamiltonianSpec(2, (), 0), h2)
    assert rep.holds and rep.lambda_total == pytest.approx(0)


def test_projection_lemma_random_diagonal():
    rng = np.random.default_rng(11)
    diag = rng.uniform(5, 8, size=8)
    diag[[0, 3, 6]] = 0
    h2 = HamiltonianSpec(3, tuple(LocalTerm(float(v), (0, 1, 2), np.diag(np.eye(8)[i]).astype(complex))
                                  for i, v in enumerate(diag)), 3)
    h1 = random_spec(3, 3, rng).scaled(0.2)
    rep = projection_lemma_check(h1, h2)
    assert rep.holds


def test_projection_lemma_hypothesis():
    h2 = HamiltonianSpec(1, (LocalTerm(0.1, (0,), P1),), 1)
    h1 = HamiltonianSpec(1, (LocalTerm(1.0, (0,), P0),), 1)
    with pytest.raises(HypothesisViolated):
        projection_lemma_check(h1, h2)

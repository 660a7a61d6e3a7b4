import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hamreduce.cnf import (Clause, ClauseCountMismatch, CnfFormula, DuplicateLiteral,
                           LengthMismatch, Literal, LiteralOutOfRange, MalformedHeader,
                           OracleCapExceeded, TautologicalClause, bits_to_int,
                           brute_force_min_violations, eval_formula, int_to_bits, parse_dimacs,
                           random_kcnf, to_dimacs, violation_counts)


def naive_min(phi):
    best = None
    for bits in itertools.product((0, 1), repeat=phi.num_vars):
        v = sum(not c.evaluate(bits) for c in phi.clauses)
        if best is None or v < best[0]:
            best = (v, bits)
    return best


def test_parse_basic():
    phi = parse_dimacs("c hi\np cnf 3 2\n1 -2 0\n2 3 0\n")
    assert phi.num_vars == 3
    assert phi.to_lists() == [[1, -2], [2, 3]]
    assert phi.arity_bound == 2


def test_parse_clause_spanning_lines_and_bytes():
    phi = parse_dimacs(b"p cnf 2 1\n1\n-2 0\n")
    assert phi.to_lists() == [[1, -2]]


@pytest.mark.parametrize("text, exc, line", [
    ("1 2 0\n", MalformedHeader, "line 1"),
    ("p cnf x 1\n1 0\n", MalformedHeader, "line 1"),
    ("p cnf 2 1\n1 3 0\n", LiteralOutOfRange, "line 2"),
    ("p cnf 2 1\n1 -1 0\n", TautologicalClause, "line 2"),
    ("p cnf 2 1\n1 1 0\n", DuplicateLiteral, "line 2"),
    ("p cnf 2 2\n1 0\n", ClauseCountMismatch, None),
])
def test_parse_errors(text, exc, line):
    with pytest.raises(exc) as info:
        parse_dimacs(text)
    if line:
        assert line in str(info.value)


def test_roundtrip():
    phi = CnfFormula.from_lists(4, [[1, -3], [2, 3, -4], [-1]])
    assert parse_dimacs(to_dimacs(phi)).to_lists() == phi.to_lists()


def test_eval_and_length():
    phi = CnfFormula.from_lists(2, [[1], [-2]])
    assert eval_formula(phi, (1, 0))
    assert not eval_formula(phi, (1, 1))
    with pytest.raises(LengthMismatch):
        eval_formula(phi, (1,))


def test_literal_and_clause():
    assert Literal.from_int(-3) == Literal(3, True)
    assert Literal.from_int(-3).to_int() == -3
    with pytest.raises(LiteralOutOfRange):
        Literal.from_int(0)
    assert Clause.from_ints([1, -2]).falsifying_assignment() == {1: 0, 2: 1}


def test_bit_packing_msb_first():
    assert int_to_bits(4, 3) == (1, 0, 0)
    assert bits_to_int((1, 0, 1)) == 5


def test_violation_counts_match_naive():
    rng = np.random.default_rng(1)
    phi = random_kcnf(6, 15, 3, rng)
    counts = violation_counts(phi)
    for x in range(64):
        bits = int_to_bits(x, 6)
        assert counts[x] == sum(not c.evaluate(bits) for c in phi.clauses)


def test_brute_force_examples():
    assert brute_force_min_violations(CnfFormula.from_lists(1, [[1], [-1]]))[0] == 1
    assert brute_force_min_violations(CnfFormula.from_lists(2, [[1, 2]])) == (0, (0, 1))
    with pytest.raises(OracleCapExceeded):
        brute_force_min_violations(CnfFormula.from_lists(30, [[1]]), cap=24)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 14), st.integers(1, 3), st.integers(0, 10**6))
def test_brute_force_matches_naive(n, m, k, seed):
    phi = random_kcnf(n, m, k, np.random.default_rng(seed))
    assert brute_force_min_violations(phi, chunk=8) == naive_min(phi)

import itertools

import pytest

from fgred.formula import And, FirstLayer, Formula, FormulaError, Threshold, evaluate
from fgred.harness import brute_force_sat, random_formula
from fgred.pairsolve import solve_ineq_naive, solve_naive
from fgred.splitlist import (
    InstanceTooLarge, format_ineq, format_pair, parse_ineq, parse_pair, split_f1, split_f2,
)


def test_single_left_gate():
    f = Formula(FirstLayer("x", "01"), "F1", 2)
    p = split_f1(f)
    assert p.A == ((0,), (1,)) and p.B == ((), ())
    assert solve_naive(p) is True


def test_xor_and_or():
    f = Formula(And((FirstLayer("x", "0110"), FirstLayer("y", "0111"))), "F1", 4)
    p = split_f1(f)
    assert [a[0] for a in p.A] == [0, 1, 1, 0]
    assert [b[0] for b in p.B] == [0, 1, 1, 1]
    assert solve_naive(p)


def test_unsatisfiable_gate_and_complement():
    f = Formula(And((FirstLayer("x", "0110"), FirstLayer("x", "1001"))), "F1", 4)
    assert solve_naive(split_f1(f)) is False is brute_force_sat(f)


def test_errors():
    with pytest.raises(FormulaError):
        split_f1(Formula(FirstLayer("x", "01"), "F1", 3))
    with pytest.raises(InstanceTooLarge):
        split_f1(random_formula(1, "F1", 8, 3), cap=8)


@pytest.mark.parametrize("seed", range(30))
def test_pairs_reproduce_evaluation(seed):
    f = random_formula(seed, "F1", 2 * (1 + seed % 4), 11)
    p = split_f1(f)
    assert len(p.A) == len(p.B) == 2 ** f.half
    halves = list(itertools.product((0, 1), repeat=f.half))
    for (i, alpha), (j, beta) in itertools.product(enumerate(halves), repeat=2):
        assert evaluate(f, alpha + beta) == p.holds(p.A[i], p.B[j])


def test_one_sided_threshold():
    f = Formula(Threshold(0, ((1, FirstLayer("x", "01")),)), "F2", 2, 1)
    p = split_f2(f)
    assert p.A == ((0,), (1,)) and p.B == ((0,), (0,))
    assert solve_ineq_naive(p)


@pytest.mark.parametrize("seed", range(20))
def test_mixed_threshold_exhaustive(seed):
    import random
    rng = random.Random(seed)
    n = 2 * rng.randint(1, 3)
    tab = lambda: "".join(rng.choice("01") for _ in range(2 ** (n // 2)))
    t = Threshold(rng.randint(-3, 3), ((2, FirstLayer("x", tab())), (-3, FirstLayer("y", tab()))))
    f = Formula(t, "F2", n, 3)
    p = split_f2(f)
    halves = list(itertools.product((0, 1), repeat=n // 2))
    for (i, alpha), (j, beta) in itertools.product(enumerate(halves), repeat=2):
        assert evaluate(f, alpha + beta) == p.holds(p.A[i], p.B[j])


@pytest.mark.parametrize("seed", range(100))
def test_f2_end_to_end(seed):
    f = random_formula(seed, "F2", 2 * (1 + seed % 5), 3 + seed % 12, M=1 + seed % 4)
    assert solve_ineq_naive(split_f2(f)) == brute_force_sat(f)


@pytest.mark.parametrize("seed", range(10))
def test_serialization_round_trip(seed):
    p = split_f1(random_formula(seed, "F1", 6, 9))
    assert parse_pair(format_pair(p)) == p
    q = split_f2(random_formula(seed, "F2", 6, 9))
    assert parse_ineq(format_ineq(q)) == q


def test_read_once_enforced():
    with pytest.raises(FormulaError):
        parse_pair("1 1 1\n(and (x 1) (x 1))\n1\n1\n")

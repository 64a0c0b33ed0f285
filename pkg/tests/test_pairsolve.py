import random

import numpy as np
import pytest

from fgred.formula import And, Formula, Lit, Or
from fgred.pairsolve import (
    TableTooLarge, Tree, build_tables, check_decomposition, decompose, solve_four_russians,
    solve_ineq_naive, solve_naive,
)
from fgred.splitlist import IneqPairInstance, PairInstance


def _tree(rng, leaves):
    if len(leaves) == 1:
        return leaves[0]
    k = rng.randint(1, len(leaves) - 1)
    return rng.choice((And, Or))((_tree(rng, leaves[:k]), _tree(rng, leaves[k:])))


def random_pair(rng, n, ma, mb):
    lits = [Lit("x", i + 1, rng.random() < 0.3) for i in range(ma)]
    lits += [Lit("y", j + 1, rng.random() < 0.3) for j in range(mb)]
    rng.shuffle(lits)
    f = Formula(_tree(rng, lits), "deMorgan", 2 * max(ma, mb))
    A = tuple(tuple(rng.randint(0, 1) for _ in range(ma)) for _ in range(n))
    B = tuple(tuple(rng.randint(0, 1) for _ in range(mb)) for _ in range(n))
    return PairInstance(f, A, B)


def _brute(p):
    return any(p.holds(a, b) for a in p.A for b in p.B)


def test_naive_trivial():
    f = Formula(And((Lit("x", 1), Lit("y", 1))), "deMorgan", 2)
    assert solve_naive(PairInstance(f, ((1,), (0,)), ((1,), (1,))))
    assert not solve_naive(PairInstance(f, ((0,),), ((1,),)))


def test_ineq_trivial():
    f = Formula(Lit("x", 1), "deMorgan", 2)
    assert solve_ineq_naive(IneqPairInstance(f, ((0,),), ((0,),), 1))
    assert not solve_ineq_naive(IneqPairInstance(f, ((1,),), ((0,),), 1))


def test_small_formula_is_one_part():
    rng = random.Random(0)
    p = random_pair(rng, 2, 2, 2)  # 7 gates < 3L - 1 for L = 3
    dec = decompose(p.formula, 3)
    assert len(dec.parts) == 1 and dec.parts[0].special == ()


def test_and_chain_L2():
    root = Lit("x", 1)
    for i in range(2, 22):
        root = And((root, Lit("x", i)))
    tree = Tree.of(root)
    dec = decompose(tree, 2)
    assert check_decomposition(dec, tree) == []
    assert all(len(p.gates) < 6 for p in dec.parts)


def test_complete_tree_L4():
    def full(d, k=[0]):
        if d == 0:
            k[0] += 1
            return Lit("x", k[0])
        return And((full(d - 1), full(d - 1)))

    tree = Tree.of(full(4))
    assert len(tree) == 31
    dec = decompose(tree, 4)
    assert check_decomposition(dec, tree) == []
    assert len(dec.parts) <= 32 and all(len(p.gates) < 12 for p in dec.parts)
    assert dec.dump().count("\n") == len(dec.parts)


def test_decomposition_random_invariants():
    rng = random.Random(3)
    for _ in range(100):
        p = random_pair(rng, 1, rng.randint(1, 30), rng.randint(1, 30))
        tree = Tree.of(p.formula.root)
        for L in range(2, 17):
            assert check_decomposition(decompose(tree, L), tree) == []


def test_checker_catches_violations():
    root = Lit("x", 1)
    for i in range(2, 22):
        root = And((root, Lit("x", i)))
    tree = Tree.of(root)
    dec = decompose(tree, 2)
    dec.parts.append(dec.parts[0])
    assert check_decomposition(dec, tree)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_tiny_falls_back(n):
    rng = random.Random(n)
    for _ in range(20):
        p = random_pair(rng, n, 3, 3)
        assert solve_four_russians(p) == solve_naive(p) == _brute(p)


def test_mutual_oracle():
    rng = random.Random(11)
    seen = set()
    for _ in range(500):
        n = rng.choice([4, 5, 16, 64, 256])
        p = random_pair(rng, n, rng.randint(1, 16), rng.randint(1, 16))
        v = solve_naive(p)
        assert solve_four_russians(p, 0.25) == v
        if n <= 64:
            assert _brute(p) == v
        seen.add(v)
    assert seen == {True, False}


def test_full_sweep_matches_naive():
    rng = random.Random(5)
    for _ in range(20):
        p = random_pair(rng, 256, 20, 20)
        assert solve_four_russians(p, 0.5, stop_early=False) == solve_naive(p, stop_early=False)


def test_table_addressing_injective():
    rng = random.Random(2)
    p = random_pair(rng, 37, 8, 8)  # 37 is not a multiple of L
    tree = Tree.of(p.formula.root)
    dec = decompose(tree, 3)
    tables = build_tables(tree, dec, np.asarray(p.A, dtype=bool))
    assert all(t.check_injective() for t in tables)
    addrs = {t.address(*(s - 1 for s in t.words.shape)) for t in tables}
    assert all(a >= 0 for a in addrs)


def test_memory_cap():
    p = random_pair(random.Random(1), 64, 8, 8)
    with pytest.raises(TableTooLarge):
        solve_four_russians(p, 0.5, table_cap=10)

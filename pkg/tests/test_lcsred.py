import itertools
import random

import numpy as np
import pytest

import fgred.lcs as lcsmod
from fgred.formula import And, Formula, Lit, Or
from fgred.harness import brute_force_sat, random_formula
from fgred.lcs import lcs, lcs_brute, lcs_dp
from fgred.lcsred import (
    CONSTANT, SIMPLE, GadgetCompiler, combine_or, format_lcs, gate_gadget, gate_gadget_simple,
    parse_lcs, reduce_to_lcs, tau_squared,
)
from fgred.splitlist import split_f1


def _rand_string(rng, n, k, runny=False):
    out = []
    while len(out) < n:
        out += [rng.randrange(k)] * (rng.randint(1, 9) if runny else 1)
    return out[:n]


def test_lcs_trivial():
    assert lcs([1], [1]) == 1
    assert lcs([], [1, 2]) == 0


def test_lcs_against_brute_force():
    rng = random.Random(0)
    for _ in range(300):
        x = _rand_string(rng, rng.randint(0, 8), rng.randint(1, 3))
        y = _rand_string(rng, rng.randint(0, 8), rng.randint(1, 3))
        assert lcs(x, y) == lcs_dp(x, y) == lcs_brute(x, y)


@pytest.mark.parametrize("threshold", [1, 2, 64])
def test_run_shortcut_matches_dp(threshold, monkeypatch):
    monkeypatch.setattr(lcsmod, "RUN_THRESHOLD", threshold)
    rng = random.Random(threshold)
    for _ in range(300):
        x = _rand_string(rng, rng.randint(0, 60), rng.randint(1, 4), True)
        y = _rand_string(rng, rng.randint(0, 60), rng.randint(1, 4), rng.random() < 0.5)
        assert lcs(x, y) == lcs_dp(x, y)


def test_greedy_prefix_identity():
    rng = random.Random(1)
    for _ in range(200):
        x = _rand_string(rng, rng.randint(0, 10), 3)
        y = _rand_string(rng, rng.randint(0, 10), 3)
        k = rng.randint(0, 5)
        assert lcs([1] * k + x, [1] * k + y) == k + lcs(x, y)


def test_input_gadgets():
    g = gate_gadget(Lit("x", 1), (1,), ())
    assert g.rho == 1 and lcs(g.x, g.y) == 1
    g = gate_gadget(Lit("x", 1), (0,), ())
    assert lcs(g.x, g.y) == 0 < g.rho
    g = gate_gadget_simple(Lit("y", 1, True), (), (0,))
    assert lcs(g.x, g.y) == g.rho == 1


@pytest.mark.parametrize("kind", [And, Or])
@pytest.mark.parametrize("variant", [CONSTANT, SIMPLE])
def test_two_input_gates(kind, variant):
    root = kind((Lit("x", 1), Lit("y", 1)))
    comp = GadgetCompiler(root, variant)
    for a, b in itertools.product((0, 1), repeat=2):
        gad = comp.gadget((a,), (b,))
        L = lcs(gad.x, gad.y)
        assert len(gad.x) == len(gad.y) == comp.n[0]
        assert L <= gad.rho and (L == gad.rho) == bool(a and b if kind is And else a or b)
        if variant == CONSTANT and kind is And:
            beta = comp.beta[0]
            assert L == 2 * beta + lcs(comp.x((a,), 1), comp.y((b,), 1)) \
                + lcs(comp.x((a,), 2), comp.y((b,), 2))


@pytest.mark.parametrize("seed", range(25))
def test_every_gate_iff(seed):
    f = random_formula(seed, "deMorgan", 2 * (1 + seed % 3), 3 + seed % 11)
    for variant in (CONSTANT, SIMPLE):
        comp = GadgetCompiler(f.root, variant)
        for a in itertools.product((0, 1), repeat=f.half):
            for b in itertools.product((0, 1), repeat=f.half):
                for v in range(len(comp.gates)):
                    L = lcs(comp.x(a, v), comp.y(b, v))
                    assert L <= comp.rho[v]
                    assert (L == comp.rho[v]) == comp.truth(a, b, v)
                if variant == CONSTANT:
                    assert comp.occurrence_violations(a, b) == []


def test_strings_depend_on_own_side_only():
    f = random_formula(3, "deMorgan", 6, 11)
    comp = GadgetCompiler(f.root)
    assert np.array_equal(comp.x((1, 0, 1)), GadgetCompiler(f.root).x((1, 0, 1)))
    rhos = {comp.gadget(a, b).rho for a in [(0, 0, 0), (1, 1, 1)] for b in [(0, 1, 0), (1, 0, 1)]}
    assert len(rhos) == 1


@pytest.mark.parametrize("seed", range(200))
def test_length_bounds(seed):
    f = random_formula(seed, "deMorgan", 8, 1 + seed % 63)
    for variant in (CONSTANT, SIMPLE):
        assert GadgetCompiler(f.root, variant).bound_violations() == []


def test_constant_alphabet_size():
    comp = GadgetCompiler(Or((Lit("x", 1), Lit("y", 1))), CONSTANT, 16)
    assert comp.alphabet == 5 * 16 * 16
    assert tau_squared(256) == pytest.approx(8 ** 0.5)


def test_alignment_single_candidate():
    X, Y, rho = combine_or([[0, 1]], [[1, 1]], 2, 1, 2)
    assert lcs(X, Y) == rho
    X, Y, rho = combine_or([[0, 0]], [[1, 1]], 2, 1, 2)
    assert lcs(X, Y) < rho


def test_alignment_exhaustive():
    for lam in (1, 2, 3):
        strings = list(itertools.product((0, 1), repeat=lam))
        for nx, ny in itertools.product((1, 2), repeat=2):
            for xs in itertools.product(strings, repeat=nx):
                for ys in itertools.product(strings, repeat=ny):
                    best = max(lcs_dp(x, y) for x in xs for y in ys)
                    for rho in range(best, lam + 1):
                        X, Y, target = combine_or(xs, ys, lam, rho, 2)
                        L = lcs(X, Y)
                        assert L <= target and (L == target) == (best == rho)


def test_alignment_random():
    rng = random.Random(9)
    for _ in range(300):
        lam, k = rng.randint(1, 7), rng.randint(2, 4)
        xs = [_rand_string(rng, lam, k) for _ in range(rng.randint(1, 4))]
        ys = [_rand_string(rng, lam, k) for _ in range(rng.randint(1, 4))]
        best = max(lcs_dp(x, y) for x in xs for y in ys)
        rho = rng.choice([best, min(lam, best + 1)])
        X, Y, target = combine_or(xs, ys, lam, rho, k)
        L = lcs(X, Y)
        assert L <= target and (L == target) == (best == rho)


def test_alignment_rejects_ragged():
    with pytest.raises(ValueError):
        combine_or([[0, 1]], [[1]], 2, 1, 2)


@pytest.mark.parametrize("seed", range(30))
def test_reduce_end_to_end(seed):
    f = random_formula(seed, "F1", 2 * (1 + seed % 3), 1 + seed % 11)
    pair = split_f1(f)
    truth = brute_force_sat(f)
    for variant in (CONSTANT, SIMPLE):
        assert reduce_to_lcs(pair, variant).solve() == truth


def test_unsatisfiable_source_stays_below_target():
    from fgred.formula import FirstLayer
    f = Formula(And((FirstLayer("x", "0110"), FirstLayer("x", "1001"))), "F1", 4)
    inst = reduce_to_lcs(split_f1(f))
    assert lcs(inst.x, inst.y) < inst.rho


def test_file_round_trip():
    inst = reduce_to_lcs(split_f1(random_formula(2, "F1", 4, 5)), SIMPLE)
    back = parse_lcs(format_lcs(inst))
    assert np.array_equal(back.x, inst.x) and np.array_equal(back.y, inst.y)
    assert back.rho == inst.rho and back.alphabet == inst.alphabet
    with pytest.raises(ValueError):
        parse_lcs("2 1 3 1\n0 1\n5\n")

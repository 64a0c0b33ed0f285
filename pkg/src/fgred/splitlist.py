"""Split-and-list: F1/F2 satisfiability to pair-finding problems."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .formula import (
    DEMORGAN, F1, F2, LEFT, RIGHT, And, ClassViolation, FirstLayer, Formula,
    FormulaError, Lit, Or, Threshold, eval_gate, parse_formula, preorder,
    to_sexpr, format_formula, validate,
)

DEFAULT_CAP = 1 << 16


class InstanceTooLarge(FormulaError):
    pass


def _check_read_once(root, ma: int, mb: int):
    seen = {LEFT: [0] * (ma + 1), RIGHT: [0] * (mb + 1)}
    for g in preorder(root):
        if isinstance(g, Lit):
            if g.index > len(seen[g.side]) - 1:
                raise FormulaError(f"input {g.side}{g.index} has no vector coordinate")
            seen[g.side][g.index] += 1
    for side, m in ((LEFT, ma), (RIGHT, mb)):
        counts = seen[side][1:]
        if any(c != 1 for c in counts):
            raise FormulaError(f"pair formula is not read-once on side {side}: {counts}")


@dataclass(frozen=True)
class PairInstance:
    """Formula-Pair: is ``formula(a, b)`` true for some ``a in A, b in B``?

    ``(x i)`` reads ``a[i-1]`` and ``(y j)`` reads ``b[j-1]``.
    """

    formula: Formula
    A: tuple
    B: tuple

    def __post_init__(self):
        if self.formula.cls != DEMORGAN:
            raise ClassViolation("pair formula must be deMorgan")
        ma, mb = self.ma, self.mb
        if any(len(a) != ma for a in self.A) or any(len(b) != mb for b in self.B):
            raise FormulaError("vectors within a list must share one length")
        _check_read_once(self.formula.root, ma, mb)

    @property
    def ma(self) -> int:
        return len(self.A[0]) if self.A else 0

    @property
    def mb(self) -> int:
        return len(self.B[0]) if self.B else 0

    @property
    def n(self) -> int:
        return len(self.A)

    def holds(self, a, b) -> bool:
        return eval_gate(self.formula.root, a, b)


@dataclass(frozen=True)
class IneqPairInstance:
    """Ineq-Formula-Pair: input ``(x i)`` is the comparison ``a[i-1] <= b[i-1]``."""

    formula: Formula
    A: tuple
    B: tuple
    M: int

    def __post_init__(self):
        if self.formula.cls != DEMORGAN:
            raise ClassViolation("pair formula must be deMorgan")
        m = self.m
        if any(len(v) != m for v in (*self.A, *self.B)):
            raise FormulaError("all vectors must share one length")
        if any(abs(e) > self.M for v in (*self.A, *self.B) for e in v):
            raise FormulaError(f"vector entry outside [-{self.M}, {self.M}]")
        if any(isinstance(g, Lit) and g.side == RIGHT for g in preorder(self.formula.root)):
            raise FormulaError("ineq pair formulas only use (x i) comparison inputs")
        _check_read_once(self.formula.root, m, 0)
        n = max(2, len(self.A))
        if self.M > n ** 8:
            raise FormulaError(f"M = {self.M} is not polynomial in n = {len(self.A)}")

    @property
    def m(self) -> int:
        return len(self.A[0]) if self.A else 0

    @property
    def n(self) -> int:
        return len(self.A)

    def comparisons(self, a, b) -> list[int]:
        return [int(x <= y) for x, y in zip(a, b)]

    def holds(self, a, b) -> bool:
        return eval_gate(self.formula.root, self.comparisons(a, b), ())


def half_assignments(h: int):
    """All half-assignments in lexicographic order (first variable most significant)."""
    return itertools.product((0, 1), repeat=h)


def _superstructure(g, replace):
    if isinstance(g, (And, Or)):
        return type(g)(tuple(_superstructure(c, replace) for c in g.children))
    return replace(g)


def _check_size(f: Formula, cap: int):
    if f.nvars % 2:
        raise FormulaError("split-and-list needs an even number of variables")
    if 1 << f.half > cap:
        raise InstanceTooLarge(f"2^{f.half} half-assignments exceed the cap {cap}")


def split_f1(f: Formula, cap: int = DEFAULT_CAP) -> PairInstance:
    if f.cls != F1:
        raise ClassViolation("split_f1 needs an F1 formula")
    _check_size(f, cap)
    gates = {LEFT: [], RIGHT: []}
    slot = {}
    for g in f.gates:
        if isinstance(g, FirstLayer):
            gates[g.side].append(g)
            slot[id(g)] = Lit(g.side, len(gates[g.side]))
    root = _superstructure(f.root, lambda g: slot[id(g)])
    pair = Formula(root, DEMORGAN, 2 * max(len(gates[LEFT]), len(gates[RIGHT]), 1))
    halves = list(half_assignments(f.half))

    def vectors(side):
        tables = [g.table for g in gates[side]]
        return tuple(tuple(int(t[k]) for t in tables) for k in range(len(halves)))

    return PairInstance(pair, vectors(LEFT), vectors(RIGHT))


def split_f2(f: Formula, cap: int = DEFAULT_CAP) -> IneqPairInstance:
    if f.cls != F2:
        raise ClassViolation("split_f2 needs an F2 formula")
    _check_size(f, cap)
    thresholds = [g for g in f.gates if isinstance(g, Threshold)]
    slot = {id(t): Lit(LEFT, j + 1) for j, t in enumerate(thresholds)}
    root = _superstructure(f.root, lambda g: slot[id(g)])
    pair = Formula(root, DEMORGAN, 2 * max(len(thresholds), 1))
    size = 1 << f.half
    A = [[0] * len(thresholds) for _ in range(size)]
    B = [[0] * len(thresholds) for _ in range(size)]
    for j, t in enumerate(thresholds):
        for k in range(size):
            left = sum(c for c, g in t.terms if g.side == LEFT and g.table[k] == "1")
            right = sum(c for c, g in t.terms if g.side == RIGHT and g.table[k] == "1")
            A[k][j] = left - t.bound
            B[k][j] = -right
    bound = max([1] + [abs(e) for v in A + B for e in v])
    return IneqPairInstance(pair, tuple(map(tuple, A)), tuple(map(tuple, B)), bound)


# ---------------------------------------------------------- serialization


def format_pair(inst: PairInstance) -> str:
    lines = [f"{inst.ma} {inst.mb} {inst.n}", to_sexpr(inst.formula.root)]
    # "-" stands for a zero-length vector (a side without first-layer gates)
    lines += ["".join(map(str, v)) or "-" for v in inst.A + inst.B]
    return "\n".join(lines) + "\n"


def parse_pair(text: str) -> PairInstance:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    ma, mb, n = map(int, lines[0].split())
    f = parse_formula(lines[1])
    f = validate(Formula(f.root, DEMORGAN, 2 * max(ma, mb, 1)))

    def bits(rows, m):
        out = tuple(tuple(int(c) for c in r.strip().strip("-")) for r in rows)
        if any(len(r) != m for r in out):
            raise FormulaError("vector line length does not match the header")
        return out

    return PairInstance(f, bits(lines[2:2 + n], ma), bits(lines[2 + n:2 + 2 * n], mb))


def format_ineq(inst: IneqPairInstance) -> str:
    lines = [f"{inst.m} {inst.n} {inst.M}", to_sexpr(inst.formula.root)]
    lines += [" ".join(map(str, v)) or "-" for v in inst.A + inst.B]
    return "\n".join(lines) + "\n"


def parse_ineq(text: str) -> IneqPairInstance:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    m, n, M = map(int, lines[0].split())
    f = parse_formula(lines[1])
    f = validate(Formula(f.root, DEMORGAN, 2 * max(m, 1)))
    rows = [tuple(int(t) for t in ln.split() if t != "-") for ln in lines[2:2 + 2 * n]]
    return IneqPairInstance(f, tuple(rows[:n]), tuple(rows[n:]), M)


__all__ = [
    "PairInstance", "IneqPairInstance", "InstanceTooLarge", "split_f1", "split_f2",
    "half_assignments", "format_pair", "parse_pair", "format_ineq", "parse_ineq",
    "format_formula",
]

"""Ineq-Formula-Pair to the discrete Frechet decision problem at threshold 1.

All coordinates are exact ``Fraction``s.  The production decision procedure
screens point distances in floating point and recomputes every cell near the
threshold exactly, so its verdict is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .formula import And, Lit, Or, eval_gate, preorder
from .splitlist import IneqPairInstance

Point = tuple  # (Fraction, Fraction)

SQUARED, PRINTED = "squared", "printed"
TOP_DELTA = Fraction(1, 2)
CHILD_SCALE = 32
LENGTH_CONSTANT = 16  # asserted C in |P|, |Q| <= C * n * s


class PlacementError(ValueError):
    pass


def point(x, y) -> Point:
    return (Fraction(x), Fraction(y))


def dist2(p: Point, q: Point) -> Fraction:
    return (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2


def shift(curve, dx) -> tuple:
    return tuple((x + dx, y) for x, y in curve)


# -------------------------------------------------------------- decision


def close_matrix(P, Q) -> np.ndarray:
    """close[i, j] iff |p_i - q_j| <= 1, decided exactly."""
    fp = np.array([[float(x), float(y)] for x, y in P])
    fq = np.array([[float(x), float(y)] for x, y in Q])
    d = (fp[:, None, 0] - fq[None, :, 0]) ** 2 + (fp[:, None, 1] - fq[None, :, 1]) ** 2
    close = d <= 1.0
    # float error on d is far below this margin for coordinates of size <= 4
    for i, j in zip(*np.nonzero(np.abs(d - 1.0) <= 1e-9)):
        close[i, j] = dist2(P[i], Q[j]) <= 1
    return close


def reachable(close: np.ndarray) -> bool:
    """Monotone path from (0, 0) to the far corner through close cells."""
    n, m = close.shape
    if not close[0, 0]:
        return False
    prev = None
    for i in range(n):
        row = close[i]
        if prev is None:
            base = np.zeros(m, dtype=bool)
            base[0] = True
        else:
            base = prev.copy()
            base[1:] |= prev[:-1]
        base &= row
        # within each run of close cells, everything after a base hit is reachable
        run = np.cumsum(~row)
        hit = np.maximum.accumulate(np.where(base, run, -1))
        prev = row & (hit == run)
        if not prev.any():
            return False
    return bool(prev[-1])


def frechet_decide(P, Q) -> bool:
    """True iff the discrete Frechet distance of P and Q is at most 1."""
    if not P or not Q:
        raise ValueError("curves must be non-empty")
    return reachable(close_matrix(P, Q))


def frechet_decide_dp(P, Q) -> bool:
    """Plain quadratic DP with exact arithmetic in every cell (test oracle)."""
    n, m = len(P), len(Q)
    ok = [[False] * m for _ in range(n)]
    for i in range(n):
        for j in range(m):
            if dist2(P[i], Q[j]) > 1:
                continue
            if i == 0 and j == 0:
                ok[i][j] = True
            else:
                ok[i][j] = (i > 0 and ok[i - 1][j]) or (j > 0 and ok[i][j - 1]) \
                    or (i > 0 and j > 0 and ok[i - 1][j - 1])
    return ok[-1][-1]


def traversals(n: int, m: int):
    """Every traversal as a list of index pairs."""
    def walk(i, j):
        if (i, j) == (n - 1, m - 1):
            yield [(i, j)]
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            if i + di < n and j + dj < m:
                for rest in walk(i + di, j + dj):
                    yield [(i, j)] + rest
    return walk(0, 0)


def frechet_decide_brute(P, Q) -> bool:
    return any(all(dist2(P[i], Q[j]) <= 1 for i, j in t) for t in traversals(len(P), len(Q)))


# --------------------------------------------------------------- gadgets


@dataclass(frozen=True)
class PlacedCurvePair:
    P: tuple
    Q: tuple
    delta: Fraction

    def decide(self) -> bool:
        return frechet_decide(self.P, self.Q)

    def placement_violations(self) -> list[str]:
        return placement_violations(self.P, self.Q, self.delta)


def placement_violations(P, Q, delta) -> list[str]:
    d2 = delta * delta
    out = []
    for name, curve, lo, hi in (("P", P, 1 - d2, 1 + d2), ("Q", Q, -d2, d2)):
        for k, (x, y) in enumerate(curve):
            if not -delta <= x <= delta:
                out.append(f"{name}[{k}] x = {x} outside [-{delta}, {delta}]")
            if not lo <= y <= hi:
                out.append(f"{name}[{k}] y = {y} outside [{lo}, {hi}]")
    return out


def _checked(pair: PlacedCurvePair) -> PlacedCurvePair:
    bad = pair.placement_violations()
    if bad:
        raise PlacementError(f"not {pair.delta}-placed: {bad[0]}")
    return pair


def comparison_p(delta, a, M) -> tuple:
    return (point(0, 1 + delta * delta * Fraction(a, M)),)


def comparison_q(delta, b, M) -> tuple:
    return (point(0, delta * delta * Fraction(b, M)),)


def comparison_gadget(delta, a_i: int, b_i: int, M: int) -> PlacedCurvePair:
    delta = Fraction(delta)
    if max(abs(a_i), abs(b_i)) > M or not 0 < delta < 1:
        raise ValueError("comparison needs |a|, |b| <= M and 0 < delta < 1")
    return PlacedCurvePair(comparison_p(delta, a_i, M), comparison_q(delta, b_i, M), delta)


def and_curve(parts, delta) -> tuple:
    """Concatenate child curves, shifting odd children right and even ones left."""
    half = Fraction(delta) / 2
    out = ()
    for k, c in enumerate(parts):
        out += shift(c, half if k % 2 == 0 else -half)
    return out


def and_gadget(children, delta) -> PlacedCurvePair:
    delta = Fraction(delta)
    for c in children:
        if c.delta > delta / 4 or c.placement_violations():
            raise PlacementError("AND children must be placed at delta/4 or finer")
    return _checked(PlacedCurvePair(and_curve([c.P for c in children], delta),
                                    and_curve([c.Q for c in children], delta), delta))


def outer_or_points(delta) -> dict:
    d = Fraction(delta)
    h, d2 = d / 2, d * d
    return {
        "s_P": point(-h, 1 - d2), "t_P": point(h, 1 - d2),
        "b_P": point(-h, 1), "e_P": point(h, 1),
        "s_Q": point(-h, d2), "s_Q*": point(-h, -d2),
        "t_Q": point(h, d2), "t_Q*": point(h, -d2),
        "b_Q": point(-h, 0), "e_Q": point(h, 0),
    }


def outer_or_p(parts, delta) -> tuple:
    pt = outer_or_points(delta)
    out = ()
    for c in parts:
        out += (pt["s_P"], pt["b_P"]) + tuple(c) + (pt["e_P"], pt["t_P"])
    return out


def outer_or_q(parts, delta) -> tuple:
    pt = outer_or_points(delta)
    out = (pt["s_Q"], pt["s_Q*"])
    for c in parts:
        out += (pt["b_Q"],) + tuple(c) + (pt["e_Q"],)
    return out + (pt["t_Q*"], pt["t_Q"])


def outer_or(children, delta) -> PlacedCurvePair:
    delta = Fraction(delta)
    if not 0 < delta <= Fraction(1, 2):
        raise ValueError("outer OR needs 0 < delta <= 1/2")
    for c in children:
        if c.delta > delta / 8 or c.placement_violations():
            raise PlacementError("outer OR children must be placed at delta/8 or finer")
    return _checked(PlacedCurvePair(outer_or_p([c.P for c in children], delta),
                                    outer_or_q([c.Q for c in children], delta), delta))


def index_curves(delta, ell: int, bound: int, form: str = SQUARED):
    """(C^P, C^Q, D^P, D^Q) encoding the comparisons [l <= l] and [-l <= -l].

    ``delta`` is the child scale.  The squared form is exactly the comparison
    gadget at that scale; the printed form uses the scale unsquared and is
    kept only to show that it breaks placement.
    """
    delta = Fraction(delta)
    step = (delta * delta if form == SQUARED else delta) * Fraction(ell, bound)
    return ((point(0, 1 + step),), (point(0, step),), (point(0, 1 - step),), (point(0, -step),))


def _wrap(curve, c, d, delta) -> tuple:
    q = Fraction(delta) / 16
    return shift(c, q) + shift(curve, -q) + shift(d, q)


def or_gadget(children, bound: int, delta, form: str = SQUARED, check: bool = True) -> PlacedCurvePair:
    """Index-wrap every child, then join them with the outer OR."""
    delta = Fraction(delta)
    child = delta / CHILD_SCALE
    if check:
        for c in children:
            if c.delta > child or c.placement_violations():
                raise PlacementError("OR children must be placed at delta/32 or finer")
    Ps, Qs = [], []
    for ell, c in enumerate(children, 1):
        cp, cq, dp, dq = index_curves(child, ell, bound, form)
        Ps.append(_wrap(c.P, cp, dp, delta))
        Qs.append(_wrap(c.Q, cq, dq, delta))
    pair = PlacedCurvePair(outer_or_p(Ps, delta), outer_or_q(Qs, delta), delta)
    return _checked(pair) if check else pair


def wrapped_children(children, bound: int, delta, form: str = SQUARED):
    """The index-wrapped child pairs, placed at delta/8."""
    delta = Fraction(delta)
    out = []
    for ell, c in enumerate(children, 1):
        cp, cq, dp, dq = index_curves(delta / CHILD_SCALE, ell, bound, form)
        out.append(PlacedCurvePair(_wrap(c.P, cp, dp, delta), _wrap(c.Q, cq, dq, delta), delta / 8))
    return out


# -------------------------------------------------------------- formulas


def _comparison_values(g: Lit, v: int, side: str):
    if side == "P":
        return -v if g.negated else v
    return -v - 1 if g.negated else v  # not [a <= b] is [-a <= -b - 1]


def gate_curve(g, vec, delta, side: str, M: int, form: str = SQUARED) -> tuple:
    """One side of the gate curves: ``vec`` is a for side "P" and b for side "Q"."""
    delta = Fraction(delta)
    if isinstance(g, Lit):
        v = _comparison_values(g, vec[g.index - 1], side)
        return comparison_p(delta, v, M) if side == "P" else comparison_q(delta, v, M)
    child = delta / CHILD_SCALE
    parts = [gate_curve(c, vec, child, side, M, form) for c in g.children]
    if isinstance(g, And):
        return and_curve(parts, delta)
    if isinstance(g, Or):
        k = len(parts)
        wrapped = []
        for ell, c in enumerate(parts, 1):
            cp, cq, dp, dq = index_curves(child, ell, k, form)
            wrapped.append(_wrap(c, cp, dp, delta) if side == "P" else _wrap(c, cq, dq, delta))
        return outer_or_p(wrapped, delta) if side == "P" else outer_or_q(wrapped, delta)
    raise TypeError(f"unsupported gate {g!r}")


def comparison_scale(inst: IneqPairInstance) -> int:
    negated = any(isinstance(g, Lit) and g.negated for g in preorder(inst.formula.root))
    return inst.M + 1 if negated else inst.M


def gate_pair(g, a, b, delta, M: int, form: str = SQUARED) -> PlacedCurvePair:
    return PlacedCurvePair(gate_curve(g, a, delta, "P", M, form),
                           gate_curve(g, b, delta, "Q", M, form), Fraction(delta))


def gate_truth(g, a, b) -> bool:
    return eval_gate(g, [int(x <= y) for x, y in zip(a, b)], ())


def formula_depth(g) -> int:
    kids = () if isinstance(g, Lit) else g.children
    return 1 + max(map(formula_depth, kids)) if kids else 0


def denominator_bound(inst: IneqPairInstance) -> int:
    root = inst.formula.root
    fanin = max([1] + [len(g.children) for g in preorder(root) if not isinstance(g, Lit)])
    return (CHILD_SCALE ** (formula_depth(root) + 2)) ** 2 * max(comparison_scale(inst), fanin)


def reduce_to_frechet(inst: IneqPairInstance, form: str = SQUARED):
    """Curves (P, Q) with d_F(P, Q) <= 1 iff some pair satisfies the formula."""
    root, M = inst.formula.root, comparison_scale(inst)
    child = TOP_DELTA / 8
    Ps = [gate_curve(root, a, child, "P", M, form) for a in inst.A]
    Qs = [gate_curve(root, b, child, "Q", M, form) for b in inst.B]
    P, Q = outer_or_p(Ps, TOP_DELTA), outer_or_q(Qs, TOP_DELTA)
    s = sum(1 for g in preorder(root) if isinstance(g, Lit))
    n = max(1, inst.n)
    if max(len(P), len(Q)) > LENGTH_CONSTANT * n * s:
        raise AssertionError(f"curve length {max(len(P), len(Q))} exceeds {LENGTH_CONSTANT}*n*s")
    if form == SQUARED:
        bound = denominator_bound(inst)
        worst = max(c.denominator for pt in P + Q for c in pt)
        if worst > bound:
            raise AssertionError(f"denominator {worst} exceeds {bound}")
    return P, Q


def max_bits(curve) -> int:
    return max(max(c.numerator.bit_length(), c.denominator.bit_length()) for pt in curve for c in pt)


# --------------------------------------------------------------- file i/o


def format_curve(curve) -> str:
    return "\n".join(f"{x.numerator}/{x.denominator} {y.numerator}/{y.denominator}"
                     for x, y in curve)


def parse_curve(text: str) -> tuple:
    out = []
    for ln in text.strip().splitlines():
        x, y = ln.split()
        out.append(point(Fraction(x), Fraction(y)))
    if not out:
        raise ValueError("empty curve")
    return tuple(out)


def format_frechet(P, Q) -> str:
    return format_curve(P) + "\n\n" + format_curve(Q) + "\n"


def parse_frechet(text: str):
    blocks = [b for b in text.strip().split("\n\n") if b.strip()]
    if len(blocks) != 2:
        raise ValueError("expected two curves separated by a blank line")
    return parse_curve(blocks[0]), parse_curve(blocks[1])


__all__ = [
    "PlacedCurvePair", "PlacementError", "frechet_decide", "frechet_decide_dp",
    "frechet_decide_brute", "comparison_gadget", "and_gadget", "or_gadget", "outer_or",
    "outer_or_points", "index_curves", "wrapped_children", "placement_violations", "gate_curve", "gate_pair",
    "reduce_to_frechet", "format_frechet", "parse_frechet", "SQUARED", "PRINTED",
]

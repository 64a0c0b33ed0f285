"""Formula-Pair to LCS: gate gadgets, the alignment gadget and instance files."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .formula import LEFT, And, Formula, Lit, Or, binarize, children, depth_reduce, eval_gate
from .lcs import lcs
from .splitlist import PairInstance

CONSTANT, SIMPLE = "constant", "simple"
DEFAULT_SIGMA = 256


def tau_squared(sigma: int) -> float:
    return math.sqrt(math.log2(sigma))


@dataclass(frozen=True)
class GateGadget:
    x: np.ndarray
    y: np.ndarray
    rho: int

    @property
    def n(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class LcsInstance:
    x: np.ndarray
    y: np.ndarray
    rho: int
    alphabet: int
    sigma: int = 0
    variant: str = CONSTANT

    def solve(self) -> bool:
        return lcs(self.x, self.y) == self.rho


class GadgetCompiler:
    """Input-independent gadget layout for a fanin-2 deMorgan formula.

    ``x(a)`` depends only on ``a`` and ``y(b)`` only on ``b``; targets and
    lengths are fixed per gate.
    """

    def __init__(self, root, variant: str = CONSTANT, sigma: int = DEFAULT_SIGMA):
        if variant not in (CONSTANT, SIMPLE):
            raise ValueError(f"unknown LCS variant {variant!r}")
        if sigma < 2:
            raise ValueError("sigma must be at least 2")
        self.variant, self.sigma = variant, sigma
        self.tau2 = tau_squared(sigma)
        self.tau = math.sqrt(self.tau2)
        gates, kids = [], []

        def walk(g):
            v = len(gates)
            gates.append(g)
            kids.append(())
            kids[v] = tuple(walk(c) for c in children(g))
            return v

        walk(binarize(root))
        self.gates, self.kids = gates, kids
        count = len(gates)
        self.height, self.rank = [0] * count, [0] * count
        layer, h = [0], 0
        while layer:
            for r, v in enumerate(layer):
                self.height[v], self.rank[v] = h, r
            layer = [c for v in layer for c in kids[v]]
            h += 1
        self.rho, self.n = [0] * count, [0] * count
        self.beta, self.pad = [0] * count, [(0, 0)] * count
        self.size, self.depth = [1] * count, [0] * count
        self.leaf_id, self.dollar = {}, {}
        for v in range(count):
            if not kids[v]:
                self.leaf_id[v] = len(self.leaf_id)
        for v in reversed(range(count)):
            self._layout(v)
        ors = [v for v in range(count) if isinstance(gates[v], Or)]
        if variant == SIMPLE:
            base = 2 * len(self.leaf_id)
            self.dollar = {v: base + k for k, v in enumerate(ors)}
            self.alphabet = base + len(ors)
        else:
            self.alphabet = 5 * sigma * sigma

    # ---------------------------------------------------------- layout

    def _layout(self, v):
        g, kids = self.gates[v], self.kids[v]
        if not kids:
            self.rho[v] = self.n[v] = 1
            return
        c1, c2 = kids
        self.size[v] = 1 + self.size[c1] + self.size[c2]
        self.depth[v] = 1 + max(self.depth[c1], self.depth[c2])
        r1, r2, n1, n2 = self.rho[c1], self.rho[c2], self.n[c1], self.n[c2]
        if self.variant == SIMPLE:
            if isinstance(g, And):
                self.rho[v], self.n[v] = r1 + r2, n1 + n2
            else:
                delta = abs(r1 - r2)
                self.rho[v], self.n[v] = max(r1, r2), n1 + n2 + delta
            return
        beta = math.ceil((n1 + n2) / self.tau2)
        self.beta[v] = beta
        if isinstance(g, And):
            self.rho[v], self.n[v] = 2 * beta + r1 + r2, n1 + n2 + 2 * beta
        else:
            d1, d2 = max(0, r2 - r1), max(0, r1 - r2)
            self.pad[v] = (d1, d2)
            self.rho[v] = 4 * beta + max(r1, r2)
            self.n[v] = n1 + n2 + d1 + d2 + 6 * beta

    def sym(self, v, s: int) -> int:
        """Symbol ``s`` of the block alphabet of gate ``v``."""
        if self.variant == SIMPLE:
            return 2 * self.leaf_id[v] + s
        i, j = self.height[v] % self.sigma, self.rank[v] % self.sigma
        return 5 * (i * self.sigma + j) + s

    # ---------------------------------------------------------- strings

    def _pieces(self, v, bits, side, out):
        g, kids = self.gates[v], self.kids[v]
        if not kids:
            if g.side == side:
                val = int(bool(bits[g.index - 1]) != g.negated)
            else:
                val = 1
            out.append((self.sym(v, val), 1))
            return
        c1, c2 = kids
        if self.variant == SIMPLE:
            if isinstance(g, And):
                self._pieces(c1, bits, side, out)
                self._pieces(c2, bits, side, out)
                return
            hi, lo = (c1, c2) if self.rho[c1] >= self.rho[c2] else (c2, c1)
            delta = (self.dollar[v], self.rho[hi] - self.rho[lo])
            if side == LEFT:
                self._pieces(hi, bits, side, out)
                self._pieces(lo, bits, side, out)
                out.append(delta)
            else:
                self._pieces(lo, bits, side, out)
                out.append(delta)
                self._pieces(hi, bits, side, out)
            return
        s = [self.sym(v, k) for k in range(5)]
        beta = self.beta[v]
        if isinstance(g, And):
            self._pieces(c1, bits, side, out)
            out += [(s[0], beta), (s[1], beta)]
            self._pieces(c2, bits, side, out)
            return
        d1, d2 = self.pad[v]
        if side == LEFT:
            out += [(s[0], beta), (s[1], beta), (s[4], d1)]
            self._pieces(c1, bits, side, out)
            out += [(s[2], beta), (s[3], beta), (s[4], d2)]
            self._pieces(c2, bits, side, out)
            out += [(s[0], beta), (s[1], beta)]
        else:
            out += [(s[2], beta), (s[3], beta), (s[4], d2)]
            self._pieces(c2, bits, side, out)
            out += [(s[0], beta), (s[1], beta), (s[4], d1)]
            self._pieces(c1, bits, side, out)
            out += [(s[2], beta), (s[3], beta)]

    def string(self, v, bits, side) -> np.ndarray:
        out = []
        self._pieces(v, bits, side, out)
        syms = np.array([p[0] for p in out], dtype=np.int64)
        counts = np.array([p[1] for p in out], dtype=np.int64)
        return np.repeat(syms, counts)

    def x(self, a, v=0) -> np.ndarray:
        return self.string(v, a, LEFT)

    def y(self, b, v=0) -> np.ndarray:
        return self.string(v, b, "y")

    def gadget(self, a, b, v=0) -> GateGadget:
        return GateGadget(self.x(a, v), self.y(b, v), self.rho[v])

    def truth(self, a, b, v=0) -> bool:
        return eval_gate(self.gates[v], a, b)

    # ---------------------------------------------------------- bounds

    def length_bound(self, v) -> float:
        if self.variant == SIMPLE:
            return (self.depth[v] + 1) * self.size[v]
        return 6 * self.tau * self.size[v] * (1 + 7 / self.tau) ** self.depth[v]

    def bound_violations(self) -> list[str]:
        bad = []
        for v in range(len(self.gates)):
            if self.n[v] > self.length_bound(v):
                bad.append(f"gate {v}: n = {self.n[v]} > {self.length_bound(v):.1f}")
            if self.variant == CONSTANT:
                cap = 6 * self.size[v] * (1 + 7 / self.tau) ** self.depth[v]
                if self.rho[v] > cap:
                    bad.append(f"gate {v}: rho = {self.rho[v]} > {cap:.1f}")
        return bad

    def occurrence_violations(self, a, b) -> list[str]:
        """Block-symbol occurrence preconditions of the AND/OR lemmas (constant variant)."""
        bad = []
        if self.variant != CONSTANT:
            return bad
        for v, kids in enumerate(self.kids):
            if not kids:
                continue
            c1, c2 = kids
            limit = (self.n[c1] + self.n[c2]) / (48 * self.tau2)
            syms = [self.sym(v, k) for k in range(5)]
            for part in (self.x(a, c1), self.x(a, c2), self.y(b, c1), self.y(b, c2)):
                worst = max(int(np.sum(part == s)) for s in syms[:4])
                if worst > limit:
                    bad.append(f"gate {v}: block symbol occurs {worst} > {limit:.2f} times")
        return bad


def gate_gadget(g, a, b, sigma: int = DEFAULT_SIGMA) -> GateGadget:
    """Constant-alphabet gadget of ``g`` taken as the root."""
    return GadgetCompiler(g, CONSTANT, sigma).gadget(a, b)


def gate_gadget_simple(g, a, b) -> GateGadget:
    return GadgetCompiler(g, SIMPLE).gadget(a, b)


# ------------------------------------------------------- alignment gadget


def combine_or(xs, ys, lam: int, rho: int, alphabet: int):
    """Strings (X, Y, rho') with LCS(X, Y) <= rho', equality iff some pair reaches rho.

    Uses two fresh symbols ``alphabet`` and ``alphabet + 1`` as guards. The
    guard ``g`` forces one x_i against one y_j; ``h`` forces all of X into a
    single guarded block of Y.
    """
    xs = [np.asarray(x, dtype=np.int64) for x in xs]
    ys = [np.asarray(y, dtype=np.int64) for y in ys]
    if not xs or not ys:
        raise ValueError("combine_or needs at least one string per side")
    if any(len(s) != lam for s in xs + ys):
        raise ValueError(f"all strings must have length {lam}")
    if not 0 <= rho <= lam:
        raise ValueError("rho must lie in [0, lambda]")
    g, h = alphabet, alphabet + 1
    K = lam - rho + 1
    N = (len(xs) + 1) * K
    K2 = 2 * lam - rho + 1

    def block(sym, count):
        return np.full(count, sym, dtype=np.int64)

    parts = [block(g, K)]
    for x in xs:
        parts += [x, block(g, K)]
    X = np.concatenate(parts)
    pad = block(h, (len(ys) + 1) * K2)
    X = np.concatenate((pad, X, pad))
    parts = [block(h, K2)]
    for y in ys:
        parts += [block(g, N), y, block(g, N), block(h, K2)]
    Y = np.concatenate(parts)
    return X, Y, (len(ys) + 1) * K2 + N + rho


# ------------------------------------------------------------- reduction


def depth_parameter(variant: str, sigma: int, size: int, exponent: float = 1.0) -> float:
    if variant == CONSTANT:
        # sqrt(tau) is below 2 for every practical sigma; depth reduction needs k >= 2
        return max(2.0, math.sqrt(math.sqrt(tau_squared(sigma))))
    return max(2.0, 2 ** (exponent * math.sqrt(math.log2(max(size, 2)))))


def reduce_to_lcs(inst: PairInstance, variant: str = CONSTANT, sigma: int = DEFAULT_SIGMA,
                  k: float | None = None, exponent: float = 1.0) -> LcsInstance:
    f = inst.formula
    if k is None:
        from .formula import leaf_count
        k = depth_parameter(variant, sigma, leaf_count(f.root), exponent)
    reduced = depth_reduce(f, k)
    comp = GadgetCompiler(reduced.root, variant, sigma)
    bad = comp.bound_violations()
    if bad:
        raise AssertionError("gadget length bound violated: " + "; ".join(bad[:3]))
    xs = [comp.x(a) for a in inst.A]
    ys = [comp.y(b) for b in inst.B]
    X, Y, rho = combine_or(xs, ys, comp.n[0], comp.rho[0], comp.alphabet)
    return LcsInstance(X, Y, rho, comp.alphabet + 2, sigma, variant)


# ---------------------------------------------------------------- files


def format_lcs(inst: LcsInstance) -> str:
    head = f"{len(inst.x)} {len(inst.y)} {inst.alphabet} {inst.rho}"
    return "\n".join([head, " ".join(map(str, inst.x.tolist())),
                      " ".join(map(str, inst.y.tolist()))]) + "\n"


def parse_lcs(text: str) -> LcsInstance:
    lines = text.splitlines() + ["", ""]
    nx, ny, alphabet, rho = map(int, lines[0].split())
    x = np.array(lines[1].split(), dtype=np.int64)
    y = np.array(lines[2].split(), dtype=np.int64)
    if len(x) != nx or len(y) != ny:
        raise ValueError("string lengths do not match the header")
    if (len(x) and x.max() >= alphabet) or (len(y) and y.max() >= alphabet):
        raise ValueError("symbol outside the declared alphabet")
    return LcsInstance(x, y, rho, alphabet)


__all__ = [
    "GateGadget", "LcsInstance", "GadgetCompiler", "gate_gadget", "gate_gadget_simple",
    "combine_or", "reduce_to_lcs", "format_lcs", "parse_lcs", "lcs", "tau_squared",
    "depth_parameter", "CONSTANT", "SIMPLE",
]

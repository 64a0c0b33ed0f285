"""Formula-Pair solvers: naive, Four-Russians (packed tables), and naive Ineq."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .formula import LEFT, And, Formula, Lit, Or, binarize, children
from .splitlist import IneqPairInstance, PairInstance

DEFAULT_TABLE_CAP = 1 << 27  # table entries, summed over parts
_BATCH_CELLS = 1 << 20


class TableTooLarge(MemoryError):
    pass


# ------------------------------------------------------------- tree nodes


@dataclass
class Tree:
    """Flat fanin-2 view of a formula; node ids are preorder positions."""

    gates: list = field(default_factory=list)
    kids: list = field(default_factory=list)

    @classmethod
    def of(cls, root) -> "Tree":
        t = cls()

        def walk(g):
            v = len(t.gates)
            t.gates.append(g)
            t.kids.append(())
            t.kids[v] = tuple(walk(c) for c in children(g))
            return v

        walk(binarize(root))
        return t

    def __len__(self):
        return len(self.gates)


@dataclass(frozen=True)
class Part:
    root: int
    gates: tuple
    special: tuple  # roots of other parts, ordered by gate id


@dataclass
class Decomposition:
    parts: list
    L: int
    size: int  # node count of the whole formula

    def dump(self) -> str:
        """One part per line: gate ids, then special gate ids."""
        lines = []
        for p in self.parts:
            gates = ",".join(map(str, p.gates))
            special = ",".join(map(str, p.special))
            lines.append(f"root={p.root} gates={gates} special={special}")
        return "\n".join(lines) + "\n"


def decompose(tree: Tree | Formula | object, L: int) -> Decomposition:
    """Cut a fanin-2 tree into parts of fewer than 3L gates by weight walks."""
    if L < 2:
        raise ValueError("L must be at least 2")
    if not isinstance(tree, Tree):
        tree = Tree.of(tree.root if isinstance(tree, Formula) else tree)
    n = len(tree)
    weight = [1] * n
    marker = [False] * n

    def residual(v):
        out, stack = [], [v]
        while stack:
            u = stack.pop()
            out.append(u)
            if u == v or not marker[u]:
                stack.extend(tree.kids[u])
        return sorted(out)

    def totals():
        tot = [0] * n
        for u in reversed(range(n)):  # children have larger preorder ids
            tot[u] = weight[u]
            if not marker[u]:
                tot[u] += sum(tot[c] for c in tree.kids[u])
        return tot

    def make_part(v):
        gates = residual(v)
        return Part(v, tuple(gates), tuple(u for u in gates if u != v and marker[u]))

    parts = []
    tot = totals()
    # never cut at the root: a residual tree below 3L is already a valid part
    while tot[0] >= 3 * L:
        v = 0
        while tot[v] >= 3 * L:
            v = max(tree.kids[v], key=lambda c: tot[c])
        parts.append(make_part(v))
        marker[v] = True
        weight[v] = L
        tot = totals()
    parts.append(make_part(0))
    return Decomposition(parts, L, n)


def check_decomposition(dec: Decomposition, tree: Tree) -> list[str]:
    """Return the violated partition invariants (empty when all hold)."""
    bad = []
    L = dec.L
    if len(dec.parts) > 4 * dec.size / L + 1:
        bad.append(f"{len(dec.parts)} parts exceed 4m/L+1 = {4 * dec.size / L + 1}")
    roots = {p.root for p in dec.parts}
    for k, p in enumerate(dec.parts):
        if len(p.gates) >= 3 * L:
            bad.append(f"part {k} has {len(p.gates)} gates, not < 3L")
        if len(p.special) > 2:
            bad.append(f"part {k} has {len(p.special)} special gates")
        if any(s not in roots for s in p.special):
            bad.append(f"part {k} has a special gate that roots no part")
    for u in range(len(tree)):
        for c in tree.kids[u]:
            common = sum(1 for p in dec.parts if u in p.gates and c in p.gates)
            if common != 1:
                bad.append(f"wire {u}->{c} lies in {common} parts")
    covered = set().union(*(p.gates for p in dec.parts))
    if covered != set(range(len(tree))):
        bad.append("parts do not cover the formula")
    return bad


# ---------------------------------------------------------- evaluation


def _eval(tree: Tree, v: int, a_cols, b_vals, special=None):
    """Evaluate node ``v`` with broadcastable a-columns and b-values."""
    if special is not None and v in special:
        return special[v]
    g = tree.gates[v]
    if isinstance(g, Lit):
        col = a_cols[g.index - 1] if g.side == LEFT else b_vals[g.index - 1]
        return ~col if g.negated else col
    left, right = (_eval(tree, c, a_cols, b_vals, special) for c in tree.kids[v])
    if isinstance(g, And):
        return left & right
    if isinstance(g, Or):
        return left | right
    raise TypeError(f"pair formulas contain only And/Or/literals, got {g!r}")


def _batches(count: int, width: int):
    step = max(1, _BATCH_CELLS // max(1, width))
    for lo in range(0, count, step):
        yield lo, min(count, lo + step)


def solve_naive(inst: PairInstance, stop_early: bool = True) -> bool:
    """Evaluate the pair formula on all n^2 pairs (vectorized over A)."""
    if not inst.A or not inst.B:
        return False
    tree = Tree.of(inst.formula.root)
    A = np.asarray(inst.A, dtype=bool).reshape(len(inst.A), -1)
    B = np.asarray(inst.B, dtype=bool).reshape(len(inst.B), -1)
    a_cols = [A[:, i][None, :] for i in range(A.shape[1])]
    found = False
    for lo, hi in _batches(len(B), len(A)):
        b_vals = [B[lo:hi, j][:, None] for j in range(B.shape[1])]
        out = _eval(tree, 0, a_cols, b_vals)
        if np.any(out):
            found = True
            if stop_early:
                return True
    return found


def solve_ineq_naive(inst: IneqPairInstance) -> bool:
    """Evaluate the comparison formula on all n^2 pairs."""
    if not inst.A or not inst.B:
        return False
    tree = Tree.of(inst.formula.root)
    A = np.asarray(inst.A, dtype=np.int64).reshape(len(inst.A), -1)
    B = np.asarray(inst.B, dtype=np.int64).reshape(len(inst.B), -1)
    for lo, hi in _batches(len(B), len(A)):
        cmp = A[None, :, :] <= B[lo:hi, None, :]
        cols = [cmp[:, :, i] for i in range(A.shape[1])]
        if np.any(_eval(tree, 0, cols, [])):
            return True
    return False


# -------------------------------------------------------- Four-Russians


def _word_dtype(L: int):
    for dt in (np.uint8, np.uint16, np.uint32, np.uint64):
        if L <= np.dtype(dt).itemsize * 8:
            return dt
    raise ValueError(f"L = {L} exceeds the 64-bit host word")


@dataclass
class PackedTable:
    """Output words of one part, indexed by (beta, bundle, x, x')."""

    part: Part
    b_leaves: tuple  # node ids of b-literals, ordered by gate id
    words: np.ndarray  # shape (2^len(b_leaves), bundles) + (2^L,) * len(special)

    def address(self, beta: int, bundle: int, *xs: int) -> int:
        return int(np.ravel_multi_index((beta, bundle, *xs), self.words.shape))

    def check_injective(self) -> bool:
        grids = np.indices(self.words.shape).reshape(self.words.ndim, -1)
        flat = np.ravel_multi_index(tuple(grids), self.words.shape)
        return len(np.unique(flat)) == flat.size


def choose_L(n: int, epsilon: float) -> int:
    return max(2, math.ceil(epsilon * math.log2(n)))


def table_entries(dec: Decomposition, tree: Tree, n: int) -> int:
    bundles = -(-n // dec.L)
    total = 0
    for p in dec.parts:
        nb = sum(1 for u in p.gates if _is_b_leaf(tree, u, p))
        total += (1 << nb) * bundles * (1 << (dec.L * len(p.special)))
    return total


def _is_b_leaf(tree: Tree, u: int, p: Part) -> bool:
    g = tree.gates[u]
    return u not in p.special and isinstance(g, Lit) and g.side != LEFT


def build_tables(tree: Tree, dec: Decomposition, A: np.ndarray) -> list[PackedTable]:
    L = dec.L
    n = A.shape[0]
    bundles = -(-n // L)
    padded = np.zeros((bundles * L, A.shape[1]), dtype=bool)
    padded[:n] = A
    a_cols = [padded[:, i] for i in range(A.shape[1])]
    dtype = _word_dtype(L)
    shifts = (np.ones(1, dtype=dtype) << np.arange(L, dtype=dtype)).astype(dtype)
    xs = (np.arange(1 << L)[:, None] >> np.arange(L)[None, :]) & 1  # bit j of x
    tables = []
    for p in dec.parts:
        b_leaves = tuple(u for u in p.gates if _is_b_leaf(tree, u, p))
        s = len(p.special)
        words = np.zeros((1 << len(b_leaves), bundles) + (1 << L,) * s, dtype=dtype)
        for beta in range(1 << len(b_leaves)):
            b_vals = {}
            for k, u in enumerate(b_leaves):
                b_vals[tree.gates[u].index - 1] = np.bool_((beta >> (len(b_leaves) - 1 - k)) & 1)
            # E[c1, c2, bundle, j]: part output with constant special inputs
            E = np.zeros((2,) * s + (bundles, L), dtype=bool)
            for combo in np.ndindex(*((2,) * s)):
                special = dict(zip(p.special, map(np.bool_, combo)))
                out = _eval(tree, p.root, a_cols, b_vals, special)
                E[combo] = np.broadcast_to(out, (bundles * L,)).reshape(bundles, L)
            acc = np.zeros((bundles,) + (1 << L,) * s, dtype=dtype)
            for j in range(L):
                if s == 0:
                    bits = E[:, j]
                elif s == 1:
                    bits = E[xs[:, j], :, j].T
                else:
                    bits = E[xs[:, j][:, None], xs[:, j][None, :], :, j].transpose(2, 0, 1)
                acc |= bits.astype(dtype) * shifts[j]
            words[beta] = acc
        tables.append(PackedTable(p, b_leaves, words))
    return tables


def solve_four_russians(inst: PairInstance, epsilon: float = 0.25,
                        table_cap: int = DEFAULT_TABLE_CAP,
                        stop_early: bool = True) -> bool:
    """Sweep all b over bundles of L vectors of A using per-part lookup tables."""
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    n = inst.n
    if n < 4:
        return solve_naive(inst, stop_early)
    tree = Tree.of(inst.formula.root)
    L = choose_L(n, epsilon)
    dec = decompose(tree, L)
    need = table_entries(dec, tree, n)
    if need > table_cap:
        raise TableTooLarge(
            f"tables need {need} entries, cap is {table_cap}; lower epsilon below {epsilon}")
    A = np.asarray(inst.A, dtype=bool).reshape(n, -1)
    B = np.asarray(inst.B, dtype=bool).reshape(len(inst.B), -1)
    tables = build_tables(tree, dec, A)
    bundles = -(-n // L)
    dtype = tables[0].words.dtype
    mask = np.full(bundles, (1 << L) - 1, dtype=dtype)
    if n % L:
        mask[-1] = (1 << (n % L)) - 1
    part_of_root = {t.part.root: k for k, t in enumerate(tables)}
    flat = [t.words.reshape(-1) for t in tables]
    ell = np.arange(bundles, dtype=np.intp)[None, :]
    found = False
    for lo, hi in _batches(len(B), bundles):
        outs = []
        for t, words in zip(tables, flat):
            beta = np.zeros(hi - lo, dtype=np.intp)
            for u in t.b_leaves:
                beta = (beta << 1) | B[lo:hi, tree.gates[u].index - 1]
            # flat address of (beta, bundle, x, x') in row-major order
            s = len(t.part.special)
            idx = (beta[:, None] * bundles + ell) << (L * s)
            for k, q in enumerate(t.part.special):
                idx |= outs[part_of_root[q]].astype(np.intp) << (L * (s - 1 - k))
            outs.append(np.take(words, idx))
        if np.any(outs[-1] & mask):
            found = True
            if stop_early:
                return True
    return found


__all__ = [
    "Tree", "Part", "Decomposition", "PackedTable", "TableTooLarge", "decompose",
    "check_decomposition", "solve_naive", "solve_ineq_naive", "solve_four_russians",
    "choose_L", "build_tables",
]

"""Formula trees: parsing, evaluation, metrics, class checks and depth reduction.

Variables come in two halves.  ``(x i)`` is the i-th variable of the left
half and ``(y i)`` the i-th of the right half (both 1-based).  A full
assignment for a formula over ``n`` variables is the left half followed by
the right half.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterator, Sequence

LEFT, RIGHT = "x", "y"
DEMORGAN, F1, F2 = "deMorgan", "F1", "F2"
CLASSES = (DEMORGAN, F1, F2)


class FormulaError(ValueError):
    pass


class ParseError(FormulaError):
    def __init__(self, msg: str, pos: int):
        super().__init__(f"{msg} at offset {pos}")
        self.pos = pos


class ClassViolation(FormulaError):
    pass


# ---------------------------------------------------------------- gates


@dataclass(frozen=True)
class Lit:
    side: str
    index: int
    negated: bool = False


@dataclass(frozen=True)
class And:
    children: tuple


@dataclass(frozen=True)
class Or:
    children: tuple


@dataclass(frozen=True)
class FirstLayer:
    """Arbitrary function of one variable half, stored as a truth table.

    ``table[k]`` is the output on the half-assignment whose bits, read with
    the first variable as most significant, spell ``k``.
    """

    side: str
    table: str

    @property
    def half_vars(self) -> int:
        return len(self.table).bit_length() - 1


@dataclass(frozen=True)
class Threshold:
    """True iff ``sum(c * child) <= bound``."""

    bound: int
    terms: tuple  # ((coef, FirstLayer), ...)


Gate = Lit | And | Or | FirstLayer | Threshold


def children(g) -> tuple:
    if isinstance(g, (And, Or)):
        return g.children
    if isinstance(g, Threshold):
        return tuple(c for _, c in g.terms)
    return ()


def is_leaf(g) -> bool:
    return isinstance(g, (Lit, FirstLayer))


def preorder(g) -> Iterator:
    stack = [g]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


# -------------------------------------------------------------- formula


@dataclass(frozen=True)
class Formula:
    root: object
    cls: str
    nvars: int
    M: int = 0
    gates: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(preorder(self.root)))

    @property
    def half(self) -> int:
        return self.nvars // 2

    def levels(self) -> list[tuple[int, int]]:
        """(height, rank) per gate id, height = distance to the root."""
        return levels(self.root)


def levels(root) -> list[tuple[int, int]]:
    ids = {id(g): k for k, g in enumerate(preorder(root))}
    out: list = [None] * len(ids)
    layer, h = [root], 0
    while layer:
        nxt = []
        for rank, g in enumerate(layer):
            out[ids[id(g)]] = (h, rank)
            nxt.extend(children(g))
        layer, h = nxt, h + 1
    return out


# ------------------------------------------------------------ evaluation


def half_index(bits: Sequence[int]) -> int:
    k = 0
    for b in bits:
        k = (k << 1) | (1 if b else 0)
    return k


def eval_gate(g, xs: Sequence[int], ys: Sequence[int]) -> bool:
    """Evaluate ``g`` with left half ``xs`` and right half ``ys``."""
    if isinstance(g, Lit):
        v = bool((xs if g.side == LEFT else ys)[g.index - 1])
        return v != g.negated
    if isinstance(g, And):
        return all(eval_gate(c, xs, ys) for c in g.children)
    if isinstance(g, Or):
        return any(eval_gate(c, xs, ys) for c in g.children)
    if isinstance(g, FirstLayer):
        bits = xs if g.side == LEFT else ys
        return g.table[half_index(bits[: g.half_vars])] == "1"
    if isinstance(g, Threshold):
        total = sum(c * eval_gate(child, xs, ys) for c, child in g.terms)
        return total <= g.bound
    raise TypeError(f"not a gate: {g!r}")


def evaluate(f: Formula, assignment: Sequence[int]) -> bool:
    if len(assignment) != f.nvars:
        raise FormulaError(
            f"assignment has {len(assignment)} bits, formula has {f.nvars} variables")
    return eval_gate(f.root, assignment[: f.half], assignment[f.half:])


# ---------------------------------------------------------------- metrics


def leaf_count(g) -> int:
    return sum(1 for h in preorder(g) if is_leaf(h))


def gate_count(g) -> int:
    return sum(1 for _ in preorder(g))


def size(f: Formula) -> int:
    if f.cls == F1:
        return sum(isinstance(g, FirstLayer) for g in f.gates)
    if f.cls == F2:
        return sum(isinstance(g, (FirstLayer, Threshold)) for g in f.gates)
    return leaf_count(f.root)


def gate_depth(g) -> int:
    kids = children(g)
    if not kids:
        return 0
    return 1 + max(gate_depth(c) for c in kids)


def depth(f: Formula | object) -> int:
    return gate_depth(f.root if isinstance(f, Formula) else f)


def binarize(g):
    """Left-leaning fanin-2 form of every And/Or gate."""
    if isinstance(g, (And, Or)):
        kids = [binarize(c) for c in g.children]
        acc = kids[0]
        for c in kids[1:]:
            acc = type(g)((acc, c))
        return acc
    if isinstance(g, Threshold):
        return g
    return g


def binarized(f: Formula) -> Formula:
    return Formula(binarize(f.root), f.cls, f.nvars, f.M)


# ---------------------------------------------------------- validation


def validate(f: Formula) -> Formula:
    half = f.half
    for g in f.gates:
        if isinstance(g, (And, Or)) and len(g.children) < 2:
            raise ClassViolation(f"{type(g).__name__} gate needs at least 2 children")
        if isinstance(g, Lit):
            if g.side not in (LEFT, RIGHT) or g.index < 1:
                raise ClassViolation(f"bad literal {g}")
            if f.nvars and g.index > half:
                raise ClassViolation(f"literal {g.side}{g.index} beyond {half} variables per half")
        if isinstance(g, FirstLayer):
            if len(g.table) != 1 << half or set(g.table) - set("01"):
                raise ClassViolation(f"first-layer table must have {1 << half} bits")

    kinds = {type(g) for g in f.gates}
    if f.cls == DEMORGAN:
        bad = kinds - {Lit, And, Or}
        if bad:
            raise ClassViolation(f"deMorgan formula contains {sorted(k.__name__ for k in bad)}")
        return f
    if Lit in kinds:
        raise ClassViolation(f"{f.cls} formula must read inputs only through first-layer gates")
    if f.cls == F1:
        if Threshold in kinds:
            raise ClassViolation("threshold gate inside an F1 formula")
        return f
    # F2: And/Or over Threshold over FirstLayer
    for g in f.gates:
        if isinstance(g, (And, Or)):
            for c in g.children:
                if isinstance(c, FirstLayer):
                    raise ClassViolation("first-layer gate must feed a threshold gate in F2")
        if isinstance(g, Threshold):
            if any(not isinstance(c, FirstLayer) for _, c in g.terms):
                raise ClassViolation("threshold children must be first-layer gates")
            for c in [g.bound, *(c for c, _ in g.terms)]:
                if abs(c) > f.M:
                    raise ClassViolation(f"threshold constant {c} outside [-{f.M}, {f.M}]")
    if isinstance(f.root, FirstLayer):
        raise ClassViolation("F2 root cannot be a first-layer gate")
    return f


# ---------------------------------------------------------------- parsing

_TOKEN = re.compile(r'\s*(?:(\()|(\))|("[01]*")|([^\s()"]+))')


def _tokens(text: str):
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            return
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        yield m.group(m.lastindex), start
        pos = m.end()


def _read(tokens, pos_hint=0):
    try:
        tok, pos = next(tokens)
    except StopIteration:
        raise ParseError("unexpected end of input", pos_hint) from None
    if tok == "(":
        items = []
        while True:
            try:
                item = _read(tokens, pos)
            except _Close:
                return items, pos
            items.append(item)
    if tok == ")":
        raise _Close(pos)
    return tok, pos


class _Close(Exception):
    pass


def _int(tok, what):
    value, pos = tok
    if isinstance(value, list):
        raise ParseError(f"expected {what}", pos)
    try:
        return int(value)
    except ValueError:
        raise ParseError(f"expected {what}, got {value!r}", pos) from None


def _build(node):
    value, pos = node
    if not isinstance(value, list) or not value:
        raise ParseError("expected a parenthesised gate", pos)
    head, hpos = value[0]
    args = value[1:]
    if head in (LEFT, RIGHT):
        if len(args) != 1:
            raise ParseError(f"({head} i) takes one index", hpos)
        return Lit(head, _int(args[0], "variable index"))
    if head == "not":
        if len(args) != 1:
            raise ParseError("(not ...) takes one literal", hpos)
        inner = _build(args[0])
        if not isinstance(inner, Lit):
            raise ParseError("negation is only allowed on literals", args[0][1])
        return Lit(inner.side, inner.index, not inner.negated)
    if head in ("and", "or"):
        if len(args) < 2:
            raise ParseError(f"({head} ...) needs at least two children", hpos)
        kids = tuple(_build(a) for a in args)
        return And(kids) if head == "and" else Or(kids)
    if head == "fl":
        if len(args) != 2:
            raise ParseError('(fl left|right "bits") expected', hpos)
        side, spos = args[0]
        table, tpos = args[1]
        if side not in ("left", "right"):
            raise ParseError("first-layer side must be left or right", spos)
        if not (isinstance(table, str) and table.startswith('"')):
            raise ParseError("truth table must be a quoted bit string", tpos)
        bits = table.strip('"')
        if not bits or len(bits) & (len(bits) - 1):
            raise ParseError("truth table length must be a power of two", tpos)
        return FirstLayer(LEFT if side == "left" else RIGHT, bits)
    if head == "thr":
        if not args:
            raise ParseError("(thr T (c g) ...) expected", hpos)
        bound = _int(args[0], "threshold constant")
        terms = []
        for term in args[1:]:
            tv, tpos = term
            if not isinstance(tv, list) or len(tv) != 2:
                raise ParseError("threshold term must be (coef gate)", tpos)
            terms.append((_int(tv[0], "coefficient"), _build(tv[1])))
        return Threshold(bound, tuple(terms))
    raise ParseError(f"unknown gate {head!r}", hpos)


_HEADER = re.compile(r";;(.*)")


def parse_header(text: str) -> dict:
    opts = {}
    for line in text.splitlines():
        m = _HEADER.match(line.strip())
        if not m:
            continue
        for part in m.group(1).split():
            if "=" in part:
                k, v = part.split("=", 1)
                opts[k.strip()] = v.strip()
    return opts


def _strip_comments(text: str) -> str:
    # blank out comments in place so error offsets refer to the original text
    return re.sub(r";[^\n]*", lambda m: " " * len(m.group()), text)


def parse_gate(text: str):
    tokens = _tokens(text)
    try:
        node = _read(tokens)
    except _Close as exc:
        raise ParseError("unbalanced ')'", exc.args[0]) from None
    rest = next(tokens, None)
    if rest is not None:
        raise ParseError("trailing input", rest[1])
    return _build(node)


def parse_formula(text: str) -> Formula:
    opts = parse_header(text)
    body = _strip_comments(text)
    root = parse_gate(body)
    gates = list(preorder(root))
    cls = opts.get("class")
    if cls is None:
        if any(isinstance(g, Threshold) for g in gates):
            cls = F2
        elif any(isinstance(g, FirstLayer) for g in gates):
            cls = F1
        else:
            cls = DEMORGAN
    if cls not in CLASSES:
        raise FormulaError(f"unknown formula class {cls!r}")
    if "nvars" in opts:
        nvars = int(opts["nvars"])
    else:
        nvars = infer_nvars(root)
    if "M" in opts:
        M = int(opts["M"])
    else:
        M = max([0] + [abs(c) for g in gates if isinstance(g, Threshold)
                       for c in (g.bound, *(t for t, _ in g.terms))])
    if nvars % 2:
        raise FormulaError("the number of variables must be even")
    return validate(Formula(root, cls, nvars, M))


def infer_nvars(root) -> int:
    half = 0
    for g in preorder(root):
        if isinstance(g, Lit):
            half = max(half, g.index)
        elif isinstance(g, FirstLayer):
            half = max(half, g.half_vars)
    return 2 * half


def to_sexpr(g) -> str:
    if isinstance(g, Lit):
        s = f"({g.side} {g.index})"
        return f"(not {s})" if g.negated else s
    if isinstance(g, (And, Or)):
        head = "and" if isinstance(g, And) else "or"
        return f"({head} " + " ".join(to_sexpr(c) for c in g.children) + ")"
    if isinstance(g, FirstLayer):
        side = "left" if g.side == LEFT else "right"
        return f'(fl {side} "{g.table}")'
    if isinstance(g, Threshold):
        terms = " ".join(f"({c} {to_sexpr(child)})" for c, child in g.terms)
        return f"(thr {g.bound} {terms})".rstrip()
    raise TypeError(g)


def format_formula(f: Formula) -> str:
    header = f";; class={f.cls} nvars={f.nvars}"
    if f.cls == F2:
        header += f" M={f.M}"
    return header + "\n" + to_sexpr(f.root) + "\n"


# ------------------------------------------------------- depth reduction


def negate(g):
    """De Morgan dual with negation pushed to the leaves."""
    if isinstance(g, Lit):
        return Lit(g.side, g.index, not g.negated)
    if isinstance(g, And):
        return Or(tuple(negate(c) for c in g.children))
    if isinstance(g, Or):
        return And(tuple(negate(c) for c in g.children))
    if isinstance(g, bool):
        return not g
    raise ClassViolation(f"cannot negate {type(g).__name__}")


def _mk(kind, a, b):
    # constant folding; a, b are gates or bools
    if kind is And:
        if a is False or b is False:
            return False
        if a is True:
            return b
        if b is True:
            return a
    else:
        if a is True or b is True:
            return True
        if a is False:
            return b
        if b is False:
            return a
    return kind((a, b))


def _substitute(g, target, value):
    if g is target:
        return value
    if isinstance(g, (And, Or)):
        a, b = g.children
        return _mk(type(g), _substitute(a, target, value), _substitute(b, target, value))
    return g


def depth_bound(k: float, s: int) -> float:
    return 3 * k * math.log(2) * math.log2(s) if s > 1 else 0.0


def size_bound(k: float, s: int) -> float | None:
    """Bonet-Buss size bound, or None when degenerate (k = 2)."""
    if k - 1 <= 1:
        return None
    return s ** (1 + 1 / (1 + math.log2(k - 1)))


def _separator(g, total):
    # heavy-path walk: first node with at most 2/3 of the leaves
    node = g
    while leaf_count(node) * 3 > 2 * total:
        a, b = node.children
        node = a if leaf_count(a) >= leaf_count(b) else b
    return node


def _balance(g, k):
    s = leaf_count(g)
    if gate_depth(g) <= depth_bound(k, s):
        return g
    sep = _separator(g, s)
    top = _substitute(g, sep, True)
    bot = _substitute(g, sep, False)
    sep_b = _balance(sep, k)
    top_b = top if isinstance(top, bool) else _balance(top, k)
    bot_b = bot if isinstance(bot, bool) else _balance(bot, k)
    return _mk(Or, _mk(And, sep_b, top_b), _mk(And, negate(sep_b), bot_b))


def depth_reduce(f: Formula, k: float = 2) -> Formula:
    """Equivalent deMorgan formula of depth at most ``(3k ln 2) log2 |f|``.

    Spira-style balancing: split off a subformula ``G`` holding between a
    third and two thirds of the leaves and rewrite ``F`` as
    ``(G and F[G:=1]) or (not G and F[G:=0])``.  Literals may be duplicated.
    """
    if f.cls != DEMORGAN:
        raise ClassViolation("depth reduction needs a deMorgan formula")
    if k < 2:
        raise ValueError("k must be at least 2")
    s = leaf_count(f.root)
    if gate_depth(f.root) <= depth_bound(k, s):
        return f
    out = _balance(binarize(f.root), k)
    if isinstance(out, bool):  # pragma: no cover - inputs carry no constants
        raise FormulaError("depth reduction collapsed to a constant")
    assert gate_depth(out) <= depth_bound(k, s) + 1e-9
    return Formula(out, DEMORGAN, f.nvars, f.M)

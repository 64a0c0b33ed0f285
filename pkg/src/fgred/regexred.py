"""Formula-Pair to regular expression pattern matching over {0, 1}."""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2

from .formula import LEFT, And, binarize, children, eval_gate
from .splitlist import PairInstance

# ------------------------------------------------------------------ regex


@dataclass(frozen=True)
class Char:
    c: str  # "0" or "1"


@dataclass(frozen=True)
class Concat:
    items: tuple


@dataclass(frozen=True)
class Union:
    items: tuple


@dataclass(frozen=True)
class Star:
    child: object


ANY = Star(Union((Char("0"), Char("1"))))


def word(bits: str):
    """The regex matching exactly ``bits``."""
    chars = tuple(Char(c) for c in bits)
    return chars[0] if len(chars) == 1 else Concat(chars)


def concat(*parts):
    items = []
    for p in parts:
        items.extend(p.items if isinstance(p, Concat) else (p,))
    return items[0] if len(items) == 1 else Concat(tuple(items))


def regex_size(r) -> int:
    if isinstance(r, Char):
        return 1
    if isinstance(r, Star):
        return 1 + regex_size(r.child)
    return 1 + sum(regex_size(c) for c in r.items)


def format_regex(r) -> str:
    if isinstance(r, Char):
        return r.c
    if isinstance(r, Star):
        inner = format_regex(r.child)
        return inner + "*" if isinstance(r.child, Char) else f"({inner})*"
    if isinstance(r, Union):
        return "|".join(format_regex(c) for c in r.items)
    return "".join(f"({format_regex(c)})" if isinstance(c, Union) else format_regex(c)
                   for c in r.items)


class RegexSyntaxError(ValueError):
    pass


def parse_regex(text: str):
    text = "".join(text.split())
    pos = 0

    def peek():
        return text[pos] if pos < len(text) else ""

    def union():
        nonlocal pos
        items = [seq()]
        while peek() == "|":
            pos += 1
            items.append(seq())
        return items[0] if len(items) == 1 else Union(tuple(items))

    def seq():
        items = []
        while peek() and peek() not in "|)":
            items.append(atom())
        if not items:
            raise RegexSyntaxError(f"empty expression at {pos}")
        return concat(*items)

    def atom():
        nonlocal pos
        c = peek()
        if c in "01":
            pos += 1
            r = Char(c)
        elif c == "(":
            pos += 1
            r = union()
            if peek() != ")":
                raise RegexSyntaxError(f"expected ')' at {pos}")
            pos += 1
        else:
            raise RegexSyntaxError(f"unexpected {c!r} at {pos}")
        while peek() == "*":
            pos += 1
            r = Star(r)
        return r

    r = union()
    if pos != len(text):
        raise RegexSyntaxError(f"trailing input at {pos}")
    return r


# ---------------------------------------------------------------- matcher


class NFA:
    """Thompson automaton with epsilon closures stored as bitmasks."""

    def __init__(self, r):
        self.eps: list[list[int]] = []
        self.char: dict[int, tuple[str, int]] = {}
        self.start, self.accept = self._build(r)
        n = len(self.eps)
        self.closure = [None] * n
        for s in range(n):
            self._close(s)
        self.masks = {c: gmpy2.mpz(0) for c in "01"}
        for s, (c, _) in self.char.items():
            self.masks[c] = gmpy2.bit_set(self.masks[c], s)
        self._memo: dict = {}

    def _new(self):
        self.eps.append([])
        return len(self.eps) - 1

    def _build(self, r):
        if isinstance(r, Char):
            s, t = self._new(), self._new()
            self.char[s] = (r.c, t)
            return s, t
        if isinstance(r, Concat):
            first = last = None
            for item in r.items:
                s, t = self._build(item)
                if first is None:
                    first = s
                else:
                    self.eps[last].append(s)
                last = t
            return first, last
        if isinstance(r, Union):
            s, t = self._new(), self._new()
            for item in r.items:
                a, b = self._build(item)
                self.eps[s].append(a)
                self.eps[b].append(t)
            return s, t
        if isinstance(r, Star):
            s, t = self._new(), self._new()
            a, b = self._build(r.child)
            self.eps[s] += [a, t]
            self.eps[b] += [a, t]
            return s, t
        raise TypeError(f"not a regex: {r!r}")

    def _close(self, s):
        if self.closure[s] is not None:
            return self.closure[s]
        seen, stack = {s}, [s]
        while stack:
            u = stack.pop()
            for v in self.eps[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        mask = gmpy2.mpz(0)
        for u in seen:
            mask = gmpy2.bit_set(mask, u)
        self.closure[s] = mask
        return mask

    def closure_is_fixed_point(self) -> bool:
        return all((self.closure[u] | self.closure[v]) == self.closure[u]
                   for u in range(len(self.eps)) for v in self.eps[u])

    def step(self, states, c, restart=True):
        key = (states, c, restart)
        got = self._memo.get(key)
        if got is None:
            live = states & self.masks[c]
            # unanchored search lets a match start at every position
            got = self.closure[self.start] if restart else gmpy2.mpz(0)
            i = gmpy2.bit_scan1(live)
            while i is not None:
                got |= self.closure[self.char[i][1]]
                i = gmpy2.bit_scan1(live, i + 1)
            self._memo[key] = got
        return got

    def search(self, text: str) -> bool:
        """True iff some substring of ``text`` is in the language."""
        states = self.closure[self.start]
        acc = self.accept
        if gmpy2.bit_test(states, acc):
            return True
        for c in text:
            states = self.step(states, c)
            if gmpy2.bit_test(states, acc):
                return True
        return False

    def fullmatch(self, text: str) -> bool:
        states = self.closure[self.start]
        for c in text:
            states = self.step(states, c, restart=False)
        return gmpy2.bit_test(states, self.accept)


def regex_match_substring(p, t: str) -> bool:
    if isinstance(p, str):
        p = parse_regex(p)
    return NFA(p).search(t)


def language(r, limit: int) -> set[str]:
    """All words of length <= limit in L(r) (brute-force oracle)."""
    if isinstance(r, Char):
        return {r.c} if limit >= 1 else set()
    if isinstance(r, Union):
        return set().union(*(language(c, limit) for c in r.items))
    if isinstance(r, Concat):
        words = {""}
        for item in r.items:
            part = language(item, limit)
            words = {u + v for u in words for v in part if len(u) + len(v) <= limit}
        return words
    base = language(r.child, limit) - {""}
    words, frontier = {""}, {""}
    while frontier:
        frontier = {u + v for u in frontier for v in base if len(u) + len(v) <= limit} - words
        words |= frontier
    return words


# -------------------------------------------------------------- encoding


def encode_number(m: int) -> str:
    if m < 0:
        raise ValueError("only non-negative numbers are encoded")
    return "110" + "0".join(bin(m)[2:]) + "011"


def substring_property_check(x: int, ys) -> bool:
    return encode_number(x) in "".join(encode_number(y) for y in ys)


# ------------------------------------------------------------- reduction


class PatternCompiler:
    """Fanin-2 view with heights measured as the longest path down."""

    def __init__(self, root):
        self.gates, self.kids = [], []

        def walk(g):
            v = len(self.gates)
            self.gates.append(g)
            self.kids.append(())
            self.kids[v] = tuple(walk(c) for c in children(g))
            return v

        walk(binarize(root))
        self.height = [0] * len(self.gates)
        for v in reversed(range(len(self.gates))):
            if self.kids[v]:
                self.height[v] = 1 + max(self.height[c] for c in self.kids[v])

    def text(self, v, a) -> str:
        g, kids = self.gates[v], self.kids[v]
        if not kids:
            val = int(bool(a[g.index - 1]) != g.negated) if g.side == LEFT else 1
            return encode_number(val)
        sep = encode_number(self.height[v] + 1)
        return self.text(kids[0], a) + sep + self.text(kids[1], a)

    def pattern(self, v, b):
        g, kids = self.gates[v], self.kids[v]
        if not kids:
            val = int(bool(b[g.index - 1]) != g.negated) if g.side != LEFT else 1
            return word(encode_number(val))
        sep = word(encode_number(self.height[v] + 1))
        p1, p2 = self.pattern(kids[0], b), self.pattern(kids[1], b)
        if isinstance(g, And):
            return concat(p1, sep, p2)
        return Union((concat(p1, sep, ANY), concat(ANY, sep, p2)))


def build_text(root, a, v: int = 0) -> str:
    return PatternCompiler(root).text(v, a)


def build_pattern(root, b, v: int = 0):
    return PatternCompiler(root).pattern(v, b)


@dataclass(frozen=True)
class RegexInstance:
    text: str
    pattern: object
    H: int

    def solve(self) -> bool:
        return regex_match_substring(self.pattern, self.text)


TEXT_CONSTANT = 32  # asserted C in |text| <= C * n * s * log2(s + 2)


def size_ratio(inst: RegexInstance, n: int, s: int) -> float:
    return max(len(inst.text), regex_size(inst.pattern)) / (n * s * math.log2(s + 2))


def reduce_to_regex(inst: PairInstance) -> RegexInstance:
    comp = PatternCompiler(inst.formula.root)
    H = comp.height[0] + 2
    sep = encode_number(H)
    text = sep + sep.join(comp.text(0, a) for a in inst.A) + sep
    branches = [concat(word(sep), comp.pattern(0, b), word(sep)) for b in inst.B]
    pattern = branches[0] if len(branches) == 1 else Union(tuple(branches))
    out = RegexInstance(text, pattern, H)
    s = sum(1 for v in comp.kids if not v)
    ratio = size_ratio(out, max(1, inst.n), s)
    if ratio > TEXT_CONSTANT:
        raise AssertionError(f"regex size ratio {ratio:.1f} exceeds {TEXT_CONSTANT}")
    return out


def blocks(text: str) -> list[int] | None:
    """Split a text into encoded numbers, or None if it is not such a concatenation."""
    out, i, n = [], 0, len(text)
    while i < n:
        if not text.startswith("110", i) or i + 3 >= n:
            return None
        bits, i = text[i + 3], i + 4
        # every digit is followed by 0, so "011" can only close the block
        while not text.startswith("011", i):
            if i + 1 >= n or text[i] != "0":
                return None
            bits += text[i + 1]
            i += 2
        out.append(int(bits, 2))
        i += 3
    return out


def format_regex_instance(inst: RegexInstance) -> str:
    return inst.text + "\n" + format_regex(inst.pattern) + "\n"


def parse_regex_instance(text: str) -> RegexInstance:
    lines = text.splitlines()
    t, p = lines[0].strip(), parse_regex(lines[1])
    if set(t) - set("01"):
        raise ValueError("text must be over {0, 1}")
    return RegexInstance(t, p, 0)


def gate_holds(root, a, b, v: int = 0) -> bool:
    return eval_gate(PatternCompiler(root).gates[v], a, b)


__all__ = [
    "Char", "Concat", "Union", "Star", "ANY", "parse_regex", "format_regex", "regex_size",
    "NFA", "PatternCompiler", "regex_match_substring", "language", "encode_number", "substring_property_check",
    "build_text", "build_pattern", "RegexInstance", "reduce_to_regex", "blocks",
    "format_regex_instance", "parse_regex_instance",
]

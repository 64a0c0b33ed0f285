"""Longest common subsequence solvers.

``lcs`` is the production solver: a bit-parallel row update on GMP integers,
with long runs of one symbol applied in closed form. ``lcs_dp`` and
``lcs_brute`` are independent oracles for tests.
"""

from __future__ import annotations

import itertools

import gmpy2
import numpy as np


def _as_array(s) -> np.ndarray:
    return np.asarray(s, dtype=np.int64).reshape(-1)


def lcs_dp(x, y) -> int:
    """Textbook quadratic DP, one numpy row at a time."""
    x, y = _as_array(x), _as_array(y)
    if len(x) == 0 or len(y) == 0:
        return 0
    prev = np.zeros(len(y) + 1, dtype=np.int64)
    for c in x:
        match = np.concatenate(([0], (y == c).astype(np.int64)))
        cand = np.maximum(prev, np.concatenate(([0], prev[:-1])) + match)
        prev = np.maximum.accumulate(cand)
    return int(prev[-1])


def lcs_brute(x, y) -> int:
    """Longest subsequence of the shorter string that is a subsequence of the other."""
    x, y = list(x), list(y)
    if len(x) > len(y):
        x, y = y, x

    def is_subseq(s):
        it = iter(y)
        return all(c in it for c in s)

    for k in range(len(x), 0, -1):
        if any(is_subseq(s) for s in itertools.combinations(x, k)):
            return k
    return 0


def runs(s):
    """Run-length encoding as parallel arrays (symbols, lengths)."""
    s = _as_array(s)
    if len(s) == 0:
        return s, s
    starts = np.flatnonzero(np.concatenate(([True], s[1:] != s[:-1])))
    lengths = np.diff(np.concatenate((starts, [len(s)])))
    return s[starts], lengths


def _window_max(s: np.ndarray, w: int) -> np.ndarray:
    """out[p] = max(s[max(0, p - w) : p]), -inf-like when empty."""
    n = len(s)
    low = np.iinfo(np.int64).min // 4
    out = np.full(n + 1, low, dtype=np.int64)
    if w <= 0 or n == 0:
        return out
    if w >= n:
        out[1:] = np.maximum.accumulate(s)
        return out
    # sparse table over s, then two overlapping blocks per query
    table = [s]
    span = 1
    while span * 2 <= w:
        prev = table[-1]
        table.append(np.maximum(prev[:-span], prev[span:]))
        span *= 2
    p = np.arange(n + 1)
    lo = np.maximum(0, p - w)
    length = p - lo
    ok = length > 0
    k = np.zeros(n + 1, dtype=np.int64)
    k[ok] = np.floor(np.log2(length[ok])).astype(np.int64)
    for level in np.unique(k[ok]):
        sel = ok & (k == level)
        row = table[level]
        a = row[lo[sel]]
        b = row[p[sel] - (1 << level)]
        out[sel] = np.maximum(a, b)
    return out


class _Row:
    """The DP row LCS(prefix, t[:j]) for j = 0..m, kept as a bit vector.

    Bit j of ``v`` is set when the row does not increase at column j + 1.
    """

    def __init__(self, t: np.ndarray):
        self.t = t
        self.m = len(t)
        self.full = gmpy2.mpz((1 << self.m) - 1)
        self.v = self.full
        self._masks: dict = {}

    def mask(self, c):
        """(match mask, its complement) for symbol ``c``."""
        got = self._masks.get(c)
        if got is None:
            bits = np.packbits(self.t == c, bitorder="little")
            m = gmpy2.mpz(int.from_bytes(bits.tobytes(), "little"))
            got = self._masks[c] = (m, self.full ^ m)
        return got

    def step(self, c, times: int = 1):
        m, rest = self.mask(c)
        v = self.v
        for _ in range(times):
            # v - (v & m) == v & ~m since the matched bits are a subset of v;
            # carries past bit m-1 never reach lower bits, so mask once at the end
            v = (v + (v & m)) | (v & rest)
        self.v = v & self.full

    def to_values(self) -> np.ndarray:
        raw = int(self.v).to_bytes((self.m + 7) // 8, "little")
        bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")[: self.m]
        return np.concatenate(([0], np.cumsum(1 - bits.astype(np.int64))))

    def from_values(self, d: np.ndarray):
        flat = (np.diff(d) == 0).astype(np.uint8)
        self.v = gmpy2.mpz(int.from_bytes(np.packbits(flat, bitorder="little").tobytes(), "little"))

    def apply_run(self, c, length: int):
        """Append ``c`` repeated ``length`` times in closed form.

        new[j] = max over j' <= j of d[j'] + min(length, P[j] - P[j']),
        where P counts ``c`` in the prefix t[:j].
        """
        d = self.to_values()
        hit = self.t == c
        p = np.concatenate(([0], np.cumsum(hit)))
        q = np.flatnonzero(hit)  # q[k] = position of the (k+1)-th c
        total = len(q)
        new = d.copy()
        if total:
            # take `length` matches from the last stretch: best j' has P[j'] <= P[j] - length
            far = p >= length
            if np.any(far):
                jp = q[p[far] - length]  # prefix length just before that occurrence
                new[far] = np.maximum(new[far], d[jp] + length)
            # fewer than `length` matches: window over the last length-1 levels
            e = d - p
            level_end = np.concatenate((q, [self.m]))  # last prefix length at each level
            best = e[level_end]
            w = _window_max(best, length - 1)
            new = np.maximum(new, p + np.maximum(e, w[np.minimum(p, len(best))]))
        self.from_values(new)

    def value(self) -> int:
        return self.m - gmpy2.popcount(self.v)


RUN_THRESHOLD = 64


def lcs(x, y) -> int:
    """LCS length; long runs of the longer string are applied in closed form."""
    x, y = _as_array(x), _as_array(y)
    if len(x) == 0 or len(y) == 0:
        return 0
    s, t = (x, y) if len(x) >= len(y) else (y, x)
    row = _Row(t)
    threshold = max(RUN_THRESHOLD, len(t) // 128)
    present = set(np.unique(t).tolist())
    for c, k in zip(*runs(s)):
        c, k = int(c), int(k)
        if c not in present:
            continue
        if k >= threshold:
            row.apply_run(c, k)
        else:
            row.step(c, k)
    return row.value()

"""Brute-force oracle, seeded generators, pipeline verifier and benchmark."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import random
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from .formula import (
    DEMORGAN, F1, F2, LEFT, RIGHT, And, FirstLayer, Formula, FormulaError, Lit, Or,
    Threshold, evaluate, format_formula, to_sexpr, validate,
)
from .frechetred import frechet_decide, reduce_to_frechet
from .lcsred import CONSTANT, DEFAULT_SIGMA, SIMPLE, reduce_to_lcs
from .pairsolve import solve_four_russians, solve_ineq_naive, solve_naive
from .regexred import reduce_to_regex, regex_size
from .splitlist import PairInstance, split_f1, split_f2

SAT_CAP = 20


def brute_force_sat(f: Formula, cap: int = SAT_CAP) -> bool:
    if f.nvars > cap:
        raise FormulaError(f"{f.nvars} variables exceed the brute-force cap {cap}")
    return any(evaluate(f, bits) for bits in itertools.product((0, 1), repeat=f.nvars))


def _tree(rng: random.Random, leaves: list):
    if len(leaves) == 1:
        return leaves[0]
    k = rng.randint(1, len(leaves) - 1)
    kind = rng.choice((And, Or))
    return kind((_tree(rng, leaves[:k]), _tree(rng, leaves[k:])))


def _table(rng, half):
    return "".join(rng.choice("01") for _ in range(1 << half))


def random_formula(seed, cls: str = F1, nvars: int = 6, ngates: int = 7, M: int = 4) -> Formula:
    """Seeded random formula; ``ngates`` counts every node of the tree."""
    if nvars < 2 or nvars % 2:
        raise ValueError("nvars must be even and at least 2")
    if ngates < 1:
        raise ValueError("ngates must be positive")
    rng = random.Random(seed)
    half = nvars // 2
    if cls == DEMORGAN:
        leaves = [Lit(rng.choice((LEFT, RIGHT)), rng.randint(1, half), rng.random() < 0.3)
                  for _ in range((ngates + 1) // 2)]
        return validate(Formula(_tree(rng, leaves), DEMORGAN, nvars))
    if cls == F1:
        leaves = [FirstLayer(rng.choice((LEFT, RIGHT)), _table(rng, half))
                  for _ in range((ngates + 1) // 2)]
        return validate(Formula(_tree(rng, leaves), F1, nvars))
    if cls == F2:
        if M < 1:
            raise ValueError("F2 formulas need M >= 1")
        if ngates < 2:
            raise ValueError("an F2 formula needs at least a threshold and one first-layer gate")
        thresholds, used = [], 0
        while not thresholds or used < ngates - 1:
            joint = 1 if thresholds else 0  # the And/Or node joining it to the rest
            fanin = rng.randint(1, max(1, min(3, ngates - used - 1 - joint)))
            cost = fanin + 1 + joint
            if thresholds and used + cost > ngates:
                break
            terms = tuple(
                (rng.choice([c for c in range(-M, M + 1) if c]),
                 FirstLayer(rng.choice((LEFT, RIGHT)), _table(rng, half)))
                for _ in range(fanin))
            thresholds.append(Threshold(rng.randint(-M, M), terms))
            used += cost
        return validate(Formula(_tree(rng, thresholds), F2, nvars, M))
    raise ValueError(f"unknown formula class {cls!r}")


def random_pair(seed, n: int, m: int) -> PairInstance:
    """Formula-Pair over a random read-once formula with ``m`` leaves and ``n`` vectors per side."""
    if m < 1 or n < 0:
        raise ValueError("need m >= 1 and n >= 0")
    rng = random.Random(seed)
    ma, mb = m - m // 2, m // 2
    lits = [Lit(LEFT, i + 1, rng.random() < 0.3) for i in range(ma)]
    lits += [Lit(RIGHT, j + 1, rng.random() < 0.3) for j in range(mb)]
    rng.shuffle(lits)
    f = Formula(_tree(rng, lits), DEMORGAN, 2 * max(ma, mb))
    A = tuple(tuple(rng.randint(0, 1) for _ in range(ma)) for _ in range(n))
    B = tuple(tuple(rng.randint(0, 1) for _ in range(mb)) for _ in range(n))
    return PairInstance(f, A, B)


# ------------------------------------------------------------ verification

F1_COLUMNS = ("naive", "four_russians", "lcs", "lcs_simple", "regex")
F2_COLUMNS = ("ineq_naive", "frechet")
COLUMNS = ("brute",) + F1_COLUMNS + F2_COLUMNS


@dataclass(frozen=True)
class Caps:
    nvars: int = 10
    ngates: int = 24
    M: int = 8
    sigma: int = DEFAULT_SIGMA


@dataclass
class Trial:
    index: int
    cls: str
    digest: str
    formula: str
    verdicts: dict = field(default_factory=dict)
    skipped: dict = field(default_factory=dict)
    sizes: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    minimized: str | None = None

    @property
    def agree(self) -> bool:
        return len(set(self.verdicts.values())) <= 1

    def record(self, drop_timings: bool = False) -> dict:
        out = asdict(self)
        if drop_timings:
            del out["timings"]
        return out


@dataclass
class VerificationReport:
    seed: int
    caps: Caps
    trials: list = field(default_factory=list)

    @property
    def disagreements(self) -> list:
        return [t for t in self.trials if not t.agree]

    @property
    def all_agree(self) -> bool:
        return not self.disagreements

    def agreement_counts(self) -> dict:
        """Per column: (trials agreeing with brute force, trials where it ran)."""
        out = {}
        for col in COLUMNS[1:]:
            ran = [t for t in self.trials if col in t.verdicts]
            out[col] = (sum(t.verdicts[col] == t.verdicts["brute"] for t in ran), len(ran))
        return out

    def summary(self) -> str:
        lines = [f"trials {len(self.trials)}  disagreements {len(self.disagreements)}"]
        for col, (ok, ran) in self.agreement_counts().items():
            lines.append(f"  {col:<14} {ok}/{ran}")
        for t in self.disagreements:
            lines.append(f"  trial {t.index} disagrees: {t.verdicts}  minimized: {t.minimized}")
        return "\n".join(lines)

    def to_json(self, drop_timings: bool = False) -> str:
        return json.dumps({"seed": self.seed, "caps": asdict(self.caps),
                           "trials": [t.record(drop_timings) for t in self.trials]}, indent=1)


def _timed(trial: Trial, name: str, fn):
    start = time.perf_counter()
    out = fn()
    trial.timings[name] = time.perf_counter() - start
    return out


def _run_pipeline(f: Formula, caps: Caps, trial: Trial):
    trial.verdicts["brute"] = _timed(trial, "brute", lambda: brute_force_sat(f))
    if f.cls == F1:
        pair = split_f1(f)
        trial.sizes.update(vectors=pair.n, ma=pair.ma, mb=pair.mb)
        trial.verdicts["naive"] = _timed(trial, "naive", lambda: solve_naive(pair))
        trial.verdicts["four_russians"] = _timed(trial, "four_russians",
                                                 lambda: solve_four_russians(pair))
        for col, variant in (("lcs", CONSTANT), ("lcs_simple", SIMPLE)):
            inst = _timed(trial, col + "_reduce", lambda: reduce_to_lcs(pair, variant, caps.sigma))
            trial.sizes[col] = [len(inst.x), len(inst.y)]
            trial.verdicts[col] = _timed(trial, col, inst.solve)
        rx = _timed(trial, "regex_reduce", lambda: reduce_to_regex(pair))
        trial.sizes["regex"] = [len(rx.text), regex_size(rx.pattern)]
        trial.verdicts["regex"] = _timed(trial, "regex", rx.solve)
        for col in F2_COLUMNS:
            trial.skipped[col] = "threshold-layer path runs on F2 formulas only"
    else:
        inst = split_f2(f)
        trial.sizes.update(vectors=inst.n, thresholds=inst.m, M=inst.M)
        trial.verdicts["ineq_naive"] = _timed(trial, "ineq_naive", lambda: solve_ineq_naive(inst))
        P, Q = _timed(trial, "frechet_reduce", lambda: reduce_to_frechet(inst))
        trial.sizes["frechet"] = [len(P), len(Q)]
        trial.verdicts["frechet"] = _timed(trial, "frechet", lambda: frechet_decide(P, Q))
        for col in F1_COLUMNS:
            trial.skipped[col] = "Boolean first-layer path runs on F1 formulas only"


def trial_formula(seed: int, index: int, caps: Caps) -> Formula:
    rng = random.Random(seed * 1_000_003 + index)
    cls = F1 if index % 2 == 0 else F2
    nvars = 2 * rng.randint(1, caps.nvars // 2)
    ngates = rng.randint(1 if cls == F1 else 2, caps.ngates)
    M = rng.randint(1, caps.M)
    return random_formula(rng.getrandbits(32), cls, nvars, ngates, M)


def _digest(f: Formula) -> str:
    return hashlib.sha256(format_formula(f).encode()).hexdigest()[:16]


def check_formula(f: Formula, caps: Caps = Caps(), index: int = 0) -> Trial:
    trial = Trial(index, f.cls, _digest(f), to_sexpr(f.root))
    _run_pipeline(f, caps, trial)
    return trial


def _shrinks(g):
    """Formulas one gate smaller: a gate replaced by one child, or a child dropped."""
    if not isinstance(g, (And, Or)):
        return
    kids = g.children
    yield from kids
    if len(kids) > 2:
        for i in range(len(kids)):
            yield type(g)(kids[:i] + kids[i + 1:])
    for i, c in enumerate(kids):
        for smaller in _shrinks(c):
            yield type(g)(kids[:i] + (smaller,) + kids[i + 1:])


def minimize(f: Formula, caps: Caps = Caps()) -> Formula:
    """Greedy gate removal that keeps the pipeline in disagreement."""
    changed = True
    while changed:
        changed = False
        for root in _shrinks(f.root):
            try:
                g = validate(Formula(root, f.cls, f.nvars, f.M))
                if not check_formula(g, caps).agree:
                    f, changed = g, True
                    break
            except FormulaError:
                continue
    return f


def _one_trial(seed: int, index: int, caps: Caps) -> Trial:
    f = trial_formula(seed, index, caps)
    trial = check_formula(f, caps, index)
    if not trial.agree:
        trial.minimized = to_sexpr(minimize(f, caps).root)
    return trial


def verify(seed: int = 0, trials: int = 50, caps: Caps = Caps(), workers: int = 1,
           dump_dir=None) -> VerificationReport:
    if caps.nvars > SAT_CAP:
        raise ValueError(f"nvars cap {caps.nvars} is beyond the brute-force range")
    report = VerificationReport(seed, caps)
    if workers > 1 and trials > 1:
        with ProcessPoolExecutor(workers) as pool:
            got = list(pool.map(_one_trial, [seed] * trials, range(trials), [caps] * trials))
    else:
        got = [_one_trial(seed, i, caps) for i in range(trials)]
    report.trials = sorted(got, key=lambda t: t.index)
    if dump_dir is not None:
        out = Path(dump_dir)
        out.mkdir(parents=True, exist_ok=True)
        for t in report.disagreements:
            (out / f"trial-{t.index}.json").write_text(json.dumps(t.record(), indent=1))
    return report


# ----------------------------------------------------------- mutation mode


@contextmanager
def mutation(name: str):
    """Temporarily break one gadget so the verifier has something to catch."""
    from . import frechetred, regexred

    if name == "regex-or":
        # an OR pattern that only accepts through its left child
        original = regexred.PatternCompiler.pattern

        def pattern(self, v, b):
            g, kids = self.gates[v], self.kids[v]
            if isinstance(g, Or):
                sep = regexred.word(regexred.encode_number(self.height[v] + 1))
                return regexred.concat(pattern(self, kids[0], b), sep, regexred.ANY)
            return original(self, v, b)

        target, attr, repl = regexred.PatternCompiler, "pattern", pattern
    elif name == "frechet-strict":
        # comparisons become strict: Q moves down by half a unit step
        original = frechetred.comparison_q

        def repl(delta, b, M):
            return original(delta, Fraction(2 * b - 1, 2), M)

        target, attr = frechetred, "comparison_q"
    else:
        raise ValueError(f"unknown mutation {name!r}")
    saved = getattr(target, attr)
    setattr(target, attr, repl)
    try:
        yield
    finally:
        setattr(target, attr, saved)


MUTATIONS = ("regex-or", "frechet-strict")


# --------------------------------------------------------------- benchmark


def bench(nmin: int = 1 << 8, nmax: int = 1 << 14, m: int = 14, epsilon: float = 0.25,
          seed: int = 0, solvers=("naive", "four-russians"), repeats: int = 1) -> list[dict]:
    """Time the Formula-Pair solvers on a doubling grid of n (full scans, no early exit)."""
    rows = []
    n = nmin
    while n <= nmax:
        inst = random_pair(seed, n, m)
        row = {"n": n, "m": m, "epsilon": epsilon}
        verdicts = set()
        for name in solvers:
            fn = {"naive": lambda: solve_naive(inst, stop_early=False),
                  "four-russians": lambda: solve_four_russians(inst, epsilon, stop_early=False)}[name]
            best = math.inf
            for _ in range(repeats):
                start = time.perf_counter()
                verdicts.add(fn())
                best = min(best, time.perf_counter() - start)
            row[name.replace("-", "_") + "_s"] = best
        if len(solvers) == 2:
            row["ratio"] = row["naive_s"] / row["four_russians_s"]
        row["agree"] = len(verdicts) == 1
        rows.append(row)
        n *= 2
    return rows


def bench_csv(rows) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()

"""Command line entry point: reduce, solve, verify, bench."""

from __future__ import annotations

import argparse
import sys
from contextlib import nullcontext
from pathlib import Path

from . import frechetred, lcsred, regexred, splitlist
from .formula import F1, F2, FormulaError, parse_formula
from .harness import MUTATIONS, Caps, bench, bench_csv, mutation, verify
from .pairsolve import solve_four_russians, solve_ineq_naive, solve_naive

TARGETS = ("lcs", "lcs-simple", "regex", "frechet", "pair", "ineq")


def _reduce(args) -> str:
    f = parse_formula(Path(args.input).read_text())
    if args.target in ("frechet", "ineq"):
        if f.cls != F2:
            raise FormulaError(f"target {args.target} needs an F2 formula, got {f.cls}")
        inst = splitlist.split_f2(f)
        if args.target == "ineq":
            return splitlist.format_ineq(inst)
        return frechetred.format_frechet(*frechetred.reduce_to_frechet(inst))
    if f.cls != F1:
        raise FormulaError(f"target {args.target} needs an F1 formula, got {f.cls}")
    pair = splitlist.split_f1(f)
    if args.target == "pair":
        return splitlist.format_pair(pair)
    if args.target == "regex":
        return regexred.format_regex_instance(regexred.reduce_to_regex(pair))
    variant = lcsred.SIMPLE if args.target == "lcs-simple" else lcsred.CONSTANT
    return lcsred.format_lcs(lcsred.reduce_to_lcs(pair, variant, args.sigma, args.k))


def _solve(args) -> bool:
    text = Path(args.instance).read_text()
    if args.target in ("lcs", "lcs-simple"):
        return lcsred.parse_lcs(text).solve()
    if args.target == "regex":
        return regexred.parse_regex_instance(text).solve()
    if args.target == "frechet":
        return frechetred.frechet_decide(*frechetred.parse_frechet(text))
    if args.target == "ineq":
        return solve_ineq_naive(splitlist.parse_ineq(text))
    pair = splitlist.parse_pair(text)
    return solve_four_russians(pair, args.epsilon) if args.solver == "four-russians" \
        else solve_naive(pair)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fgred", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reduce", help="reduce a formula file to a target instance")
    r.add_argument("--target", choices=TARGETS, required=True)
    r.add_argument("--input", required=True, help="formula file")
    r.add_argument("--out", help="output path (default: stdout)")
    r.add_argument("--sigma", type=int, default=lcsred.DEFAULT_SIGMA)
    r.add_argument("--k", type=float, default=None, help="depth-reduction parameter")

    s = sub.add_parser("solve", help="decide an instance file")
    s.add_argument("--target", choices=TARGETS, required=True)
    s.add_argument("--instance", required=True)
    s.add_argument("--solver", choices=("naive", "four-russians"), default="naive")
    s.add_argument("--epsilon", type=float, default=0.25)

    v = sub.add_parser("verify", help="cross-check every reduction against brute force")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=50)
    v.add_argument("--nvars", type=int, default=Caps.nvars)
    v.add_argument("--ngates", type=int, default=Caps.ngates)
    v.add_argument("--M", type=int, default=Caps.M)
    v.add_argument("--sigma", type=int, default=Caps.sigma)
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("--json", help="write the full report here")
    v.add_argument("--dump", help="directory for disagreeing instances")
    v.add_argument("--mutate", choices=MUTATIONS, help="break a gadget on purpose")

    b = sub.add_parser("bench", help="time naive against Four-Russians, CSV output")
    b.add_argument("--solver", choices=("naive", "four-russians", "both"), default="both")
    b.add_argument("--nmin", type=int, default=1 << 8)
    b.add_argument("--nmax", type=int, default=1 << 14)
    b.add_argument("--m", type=int, default=14)
    b.add_argument("--epsilon", type=float, default=0.25)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--repeats", type=int, default=1)
    b.add_argument("--out", help="CSV path (default: stdout)")
    return p


def _emit(text: str, path):
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reduce":
            _emit(_reduce(args), args.out)
        elif args.command == "solve":
            print("true" if _solve(args) else "false")
        elif args.command == "verify":
            caps = Caps(args.nvars, args.ngates, args.M, args.sigma)
            if args.mutate and args.workers > 1:
                raise ValueError("--mutate only works with a single worker")
            with mutation(args.mutate) if args.mutate else nullcontext():
                report = verify(args.seed, args.trials, caps, args.workers, args.dump)
            print(report.summary())
            if args.json:
                Path(args.json).write_text(report.to_json())
            return 0 if report.all_agree else 1
        else:
            solvers = ("naive", "four-russians") if args.solver == "both" else (args.solver,)
            rows = bench(args.nmin, args.nmax, args.m, args.epsilon, args.seed, solvers,
                         args.repeats)
            _emit(bench_csv(rows), args.out)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

import json

import pytest

from fgred import cli
from fgred.formula import (
    F2, And, Formula, FormulaError, Lit, Or, Threshold, binarized, format_formula, gate_count,
    preorder,
)
from fgred.harness import (
    COLUMNS, Caps, bench, bench_csv, brute_force_sat, check_formula, minimize, mutation,
    random_formula, random_pair, trial_formula, verify,
)
from fgred.pairsolve import solve_naive
from fgred.splitlist import split_f1


def test_brute_force_trivial():
    x = Lit("x", 1)
    assert not brute_force_sat(Formula(And((x, Lit("x", 1, True))), "deMorgan", 2))
    assert brute_force_sat(Formula(Or((x, Lit("x", 1, True))), "deMorgan", 2))
    with pytest.raises(FormulaError):
        brute_force_sat(Formula(x, "deMorgan", 22))


def test_brute_force_matches_pair_solver():
    for seed in range(30):
        f = random_formula(seed, "F1", 2 * (1 + seed % 4), 1 + seed % 15)
        assert brute_force_sat(f) == solve_naive(split_f1(f))


@pytest.mark.parametrize("cls", ["deMorgan", "F1", "F2"])
def test_random_formula_deterministic(cls):
    a = format_formula(random_formula(11, cls, 6, 9, 5))
    assert a == format_formula(random_formula(11, cls, 6, 9, 5))
    assert a != format_formula(random_formula(12, cls, 6, 9, 5))


def test_random_formula_layers():
    for seed in range(20):
        f = random_formula(seed, "F2", 6, 4 + seed, 3)
        assert f.cls == F2
        for g in preorder(f.root):
            if isinstance(g, Threshold):
                assert all(abs(c) <= 3 and c for c, _ in g.terms) and abs(g.bound) <= 3


def test_random_formula_gate_budget():
    for seed in range(40):
        ngates = 1 + seed % 25
        for cls in ("deMorgan", "F1"):
            f = random_formula(seed, cls, 4, ngates)
            assert abs(gate_count(binarized(f).root) - ngates) <= 1
        if ngates >= 2:
            assert gate_count(random_formula(seed, "F2", 4, ngates).root) <= ngates


def test_random_formula_rejects_bad_parameters():
    for args in [("F1", 3, 5), ("F1", 4, 0), ("F2", 4, 1), ("nope", 4, 3)]:
        with pytest.raises(ValueError):
            random_formula(0, *args)


def test_random_pair_shape():
    p = random_pair(3, 9, 5)
    assert (p.n, p.ma, p.mb) == (9, 3, 2)
    assert random_pair(3, 9, 5) == p


def test_verify_all_columns_agree():
    report = verify(seed=4, trials=12)
    assert report.all_agree and len(report.trials) == 12
    for t in report.trials:
        # every column either ran or says why not
        assert set(t.verdicts) | set(t.skipped) == set(COLUMNS)
        assert not set(t.verdicts) & set(t.skipped)
        assert all(isinstance(v, bool) for v in t.verdicts.values())


def test_verify_empty():
    report = verify(seed=0, trials=0)
    assert report.trials == [] and report.all_agree


def test_verify_deterministic():
    a = verify(seed=7, trials=6).to_json(drop_timings=True)
    assert a == verify(seed=7, trials=6).to_json(drop_timings=True)
    assert json.loads(a)["seed"] == 7


def test_verify_parallel_matches_serial():
    serial = verify(seed=2, trials=4).to_json(drop_timings=True)
    assert verify(seed=2, trials=4, workers=2).to_json(drop_timings=True) == serial


def test_verify_rejects_large_caps():
    with pytest.raises(ValueError):
        verify(trials=1, caps=Caps(nvars=30))


@pytest.mark.parametrize("name", ["regex-or", "frechet-strict"])
def test_mutation_is_detected_and_minimized(name, tmp_path):
    with mutation(name):
        report = verify(seed=1, trials=30, dump_dir=tmp_path)
    assert not report.all_agree
    for t in report.disagreements:
        assert t.minimized is not None and len(t.minimized) <= len(t.formula)
        assert (tmp_path / f"trial-{t.index}.json").exists()
    # the patch is undone afterwards
    assert verify(seed=1, trials=30).all_agree


def test_unknown_mutation():
    with pytest.raises(ValueError):
        with mutation("nope"):
            pass


def test_minimize_keeps_disagreement():
    with mutation("regex-or"):
        report = verify(seed=1, trials=30)
        t = report.disagreements[0]
        f = trial_formula(1, t.index, report.caps)
        small = minimize(f)
        assert not check_formula(small).agree
        assert gate_count(small.root) <= gate_count(f.root)


def test_bench_rows():
    rows = bench(64, 256, 6, 0.25, seed=1)
    assert [r["n"] for r in rows] == [64, 128, 256]
    for r in rows:
        assert r["agree"] and r["ratio"] == pytest.approx(r["naive_s"] / r["four_russians_s"])
    csv = bench_csv(rows)
    assert csv.splitlines()[0] == "n,m,epsilon,naive_s,four_russians_s,ratio,agree"
    assert len(csv.splitlines()) == 4
    single = bench(32, 32, 4, solvers=("naive",))
    assert list(single[0]) == ["n", "m", "epsilon", "naive_s", "agree"]
    assert bench_csv([]) == ""


# ---------------------------------------------------------------------- CLI


@pytest.fixture
def formulas(tmp_path):
    f1 = tmp_path / "f1.txt"
    f1.write_text(format_formula(random_formula(3, "F1", 6, 9)))
    f2 = tmp_path / "f2.txt"
    f2.write_text(format_formula(random_formula(3, "F2", 4, 6, 3)))
    return f1, f2


@pytest.mark.parametrize("target", ["lcs", "lcs-simple", "regex", "pair", "frechet", "ineq"])
def test_cli_reduce_then_solve(target, formulas, tmp_path, capsys):
    f1, f2 = formulas
    src = f2 if target in ("frechet", "ineq") else f1
    out = tmp_path / f"inst.{target}"
    assert cli.main(["reduce", "--target", target, "--input", str(src), "--out", str(out)]) == 0
    assert cli.main(["solve", "--target", target, "--instance", str(out)]) == 0
    from fgred.formula import parse_formula
    want = brute_force_sat(parse_formula(src.read_text()))
    assert capsys.readouterr().out.strip() == ("true" if want else "false")


def test_cli_four_russians_solver(formulas, tmp_path, capsys):
    out = tmp_path / "p.txt"
    cli.main(["reduce", "--target", "pair", "--input", str(formulas[0]), "--out", str(out)])
    assert cli.main(["solve", "--target", "pair", "--solver", "four-russians",
                     "--instance", str(out)]) == 0
    assert capsys.readouterr().out.strip() in ("true", "false")


def test_cli_wrong_class(formulas, capsys):
    assert cli.main(["reduce", "--target", "regex", "--input", str(formulas[1])]) == 2
    assert "F1" in capsys.readouterr().err


def test_cli_verify_exit_codes(tmp_path, capsys):
    report = tmp_path / "r.json"
    assert cli.main(["verify", "--trials", "4", "--json", str(report)]) == 0
    assert len(json.loads(report.read_text())["trials"]) == 4
    assert cli.main(["verify", "--seed", "1", "--trials", "30", "--mutate", "regex-or"]) == 1
    assert "disagrees" in capsys.readouterr().out


def test_cli_bench_csv(tmp_path):
    out = tmp_path / "b.csv"
    assert cli.main(["bench", "--nmin", "32", "--nmax", "64", "--m", "4", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].endswith("ratio,agree") and len(lines) == 3

import json

import pytest

from diffinv.cli import main

from conftest import CORPUS


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def div(name):
    return CORPUS / f"{name}.div"


def prf(name):
    return CORPUS / f"{name}.prf"


def test_check_rotation(capsys):
    code, out, _ = run(capsys, "check", div("rotation"), "--proof", prf("rotation"))
    assert code == 0
    assert "|- 0 >= 0  => Valid(identity)" in out


def test_check_cut_and_aux(capsys):
    assert run(capsys, "check", div("cut"), "--proof", prf("cut"))[0] == 0
    assert run(capsys, "check", div("decay_gt"), "--proof", prf("decay_gt"))[0] == 0


def test_check_invalid(capsys):
    code, out, _ = run(capsys, "check", div("diagonal"), "--proof", prf("diagonal"))
    assert code == 1
    assert "Invalid(" in out and "refuted leaf: 0" in out


def test_check_unknown(capsys, tmp_path):
    problem = tmp_path / "p.div"
    problem.write_text("var x, y\node x' = 0, y' = 0\npre x = y\npost x^2 + x*y + y^2 >= 0\n")
    script = tmp_path / "p.prf"
    # the last premise is true but outside every decision tier
    script.write_text("invariant x^2 + x*y + y^2 >= 0\n")
    code, out, _ = run(capsys, "check", problem, "--proof", script)
    assert code == 2
    assert "result: Unknown" in out


def test_usage_errors(capsys, tmp_path):
    assert run(capsys, "check", div("rotation"))[0] == 3
    assert run(capsys, "check", tmp_path / "missing.div", "--proof", prf("rotation"))[0] == 3
    bad = tmp_path / "bad.prf"
    bad.write_text("invariant x >=")
    code, out, err = run(capsys, "check", div("rotation"), "--proof", bad)
    assert code == 3 and out == "" and err.startswith("diffinv:")
    closed = tmp_path / "closed.prf"
    closed.write_text("open-invariant x >= 0")
    assert run(capsys, "check", div("drift_geq"), "--proof", closed)[0] == 3
    assert run(capsys, "prove", div("cut"), "--class", "geq,neq")[0] == 3
    assert run(capsys, "nonsense")[0] == 3


def test_prove_cut_proof(capsys):
    code, out, _ = run(capsys, "prove", div("cut"), "--class", "geq,and", "--max-degree", "1", "--coeffs", "-1,0,1", "--max-atoms", "2", "--cuts", "1")
    assert code == 0
    assert out.splitlines()[0] == "cut y >= 0 { invariant y >= 0 } { invariant x >= 0 & y >= 0 }"


def test_prove_exhausts(capsys):
    args = ["--max-degree", "3", "--coeffs", "-2..2", "--budget", "2000"]
    assert run(capsys, "prove", div("cut"), "--class", "geq,and", "--cuts", "0", *args)[0] == 4
    assert run(capsys, "prove", div("drift_geq"), "--class", "eq", *args)[0] == 4


def test_prove_check_roundtrip(capsys, tmp_path):
    code, out, _ = run(capsys, "prove", div("cut"), "--class", "geq,and", "--max-degree", "1", "--max-atoms", "2", "--cuts", "1", "--json")
    assert code == 0
    proved = json.loads(out)
    script = tmp_path / "found.prf"
    script.write_text(proved["script"] + "\n")
    code, out, _ = run(capsys, "check", div("cut"), "--proof", script, "--json")
    assert code == 0
    assert json.loads(out)["hash"] == proved["hash"]


def test_derive(capsys):
    from diffinv.formulas import parse

    cases = [
        ("rotation", "x^2+y^2 >= p^2", "0 >= 0"),
        ("damped", "w^2*x^2+y^2 <= c^2", "-4*d*w*y^2 <= 0"),
        ("diagonal", "-(x-y)^2 >= 0", "-2*(x-y)*(1-y) >= 0"),
    ]
    for name, formula, expected in cases:
        code, out, _ = run(capsys, "derive", div(name), "--formula", formula)
        assert code == 0
        # printed in canonical right-hand-side-zero form
        assert parse(out.strip()) == parse(expected)
    assert run(capsys, "derive", div("rotation"), "--formula", "x >=")[0] == 3


def test_falsify(capsys, tmp_path):
    down = tmp_path / "down.div"
    down.write_text("var x\node x' = -1\npre x >= 0\npost x >= 0\n")
    code, out, _ = run(capsys, "falsify", down, "--samples", "100", "--json")
    assert code == 0
    report = json.loads(out)
    assert abs(report["exit_time"] - float(eval(report["initial"]["x"]))) < 2e-3
    damped = tmp_path / "damped.div"
    damped.write_text(
        "var x, y\nconst c\node x' = y, y' = -x - y\n"
        "pre x^2 + y^2 <= c^2\npost x^2 + y^2 <= c^2\n"
    )
    assert run(capsys, "falsify", damped, "--samples", "200", "--time", "5")[0] == 4
    ring = tmp_path / "ring.div"
    ring.write_text("var x, y\node x' = y, y' = -x\npre x^2 + y^2 >= 1\npost x^2 + y^2 >= 2\n")
    assert run(capsys, "falsify", ring, "--samples", "50", "--time", "1", "--box", "-2,2")[0] == 0
    assert run(capsys, "falsify", ring, "--box", "3,1")[0] == 3


def test_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("DIFFINV_SEED", "42")
    a = run(capsys, "check", div("diagonal"), "--proof", prf("diagonal"), "--json")[1]
    b = run(capsys, "check", div("diagonal"), "--proof", prf("diagonal"), "--json", "--seed", "42")[1]
    assert a == b
    monkeypatch.setenv("DIFFINV_SEED", "nope")
    assert run(capsys, "check", div("diagonal"), "--proof", prf("diagonal"))[0] == 3

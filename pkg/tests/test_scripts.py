import pytest

from diffinv.formulas import parse, parse_term as t
from diffinv.kernel import check_proof
from diffinv.scripts import (
    Aux,
    Cut,
    Generalize,
    Invariant,
    ScriptError,
    UseReduction,
    Weaken,
    format_problem,
    format_script,
    parse_problem,
    parse_script,
    replay,
    tree_hash,
)

from conftest import CORPUS, PROOFS, load_problem, load_script


def test_problem_file():
    pf = parse_problem((CORPUS / "damped.div").read_text())
    assert pf.variables == ("x", "y")
    assert pf.constants == ("w", "d", "c")
    assert pf.problem.sys.domain == parse("w >= 0 & d >= 0")
    assert parse_problem(format_problem(pf)) == pf


@pytest.mark.parametrize(
    "text",
    [
        "var x\node x' = y\npre x >= 0\npost x >= 0",  # y undeclared
        "var x\npre x >= 0\npost x >= 0",  # no ode
        "var x\nconst a\node a' = 1\npre x >= 0\npost x >= 0",
        "var x\node x' = 1\node x' = 2\npre x >= 0\npost x >= 0",
        "var x\node x' = 1\npre x >= \npost x >= 0",
        "var x\nfoo bar\n",
    ],
)
def test_problem_errors(text):
    with pytest.raises(ScriptError):
        parse_problem(text)


def test_script_syntax():
    s = parse_script("cut y >= 0 { invariant y >= 0 } { invariant x >= 0 & y >= 0 }")
    assert s == Cut(parse("y >= 0"), Invariant(parse("y >= 0")), Invariant(parse("x >= 0 & y >= 0")))
    s = parse_script("aux y' = (1/2)*y with x*y^2 = 1 { invariant x*y^2 = 1 }")
    assert s == Aux("y", t("y/2"), parse("x*y^2 = 1"), Invariant(parse("x*y^2 = 1")))
    s = parse_script("aux z' = z^2 with x*z^2 = 1 assume-global { weaken }")
    assert s.assume_global and s.body == Weaken()
    s = parse_script("aux z' = z with x - z^2 > 0 witness 0 { weaken }")
    assert s.witness == t("0")
    assert parse_script("generalize x^2 <= 25 { open-invariant x > 0 }") == Generalize(
        parse("x^2 <= 25"), Invariant(parse("x > 0"), open=True)
    )
    assert parse_script("# comment\nuse-reduction eq-to-weak\n") == UseReduction("eq-to-weak")


@pytest.mark.parametrize(
    "text",
    ["", "cut x >= 0 { weaken }", "invariant x >= 0 { weaken }", "frobnicate", "weaken }", "use-reduction nope", "aux y = 1 with x = 0 { weaken }"],
)
def test_script_errors(text):
    with pytest.raises(ScriptError):
        parse_script(text)


@pytest.mark.parametrize("div,prf,expected", PROOFS)
def test_format_roundtrip_keeps_tree(div, prf, expected):
    script = load_script(prf)
    again = parse_script(format_script(script))
    assert again == script
    problem = load_problem(div)
    assert tree_hash(replay(script, problem)) == tree_hash(replay(again, problem))


def test_replay_errors_are_script_errors():
    with pytest.raises(ScriptError):
        replay(parse_script("open-invariant x >= 0"), load_problem("drift_geq"))
    with pytest.raises(ScriptError):
        replay(parse_script("aux x' = x with x = 1 { weaken }"), load_problem("decay_gt"))
    with pytest.raises(ScriptError):
        replay(parse_script("use-reduction collapse"), load_problem("drift_geq"))


def test_weaken_and_generalize():
    problem = load_problem("interval")
    assert check_proof(replay(parse_script("generalize x^2 <= 25 { invariant x^2 <= 25 }"), problem)).is_valid
    assert not check_proof(replay(Weaken(), problem)).is_valid

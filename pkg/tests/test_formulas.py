import pytest
from hypothesis import given, strategies as st

from diffinv.formulas import (
    AND,
    EQ,
    GEQ,
    GT,
    OR,
    And,
    Atom,
    Or,
    ParseError,
    UnsupportedOperator,
    classify,
    holds_at,
    is_open,
    negate,
    parse,
    parse_opclass,
    parse_term,
    prop_equivalent,
)

t = parse_term


def test_parse_examples():
    assert parse("x^2+y^2 >= p^2") == Atom(t("x^2+y^2-p^2"), GEQ)
    assert parse("!(a >= b)") == Atom(t("b-a"), GT)
    assert parse("p <= q") == Atom(t("q-p"), GEQ)
    assert parse("x < 1") == Atom(t("1-x"), GT)
    assert parse("x = y") == Atom(t("x-y"), EQ)


def test_sugar_is_eliminated():
    f = parse("x >= 0 -> y > 0")
    assert f == Or(Atom(t("-x"), GT), Atom(t("y"), GT))
    g = parse("x > 0 <-> y > 0")
    assert classify(g) == {GT, GEQ, AND, OR}


def test_division_and_errors():
    assert parse("y/2 >= 0") == Atom(t("1/2*y"), GEQ)
    with pytest.raises(UnsupportedOperator):
        parse("x != 0")
    with pytest.raises(UnsupportedOperator):
        parse("1/x >= 0")
    with pytest.raises(ParseError) as err:
        parse("x >= ")
    assert err.value.pos == 4
    with pytest.raises(UnsupportedOperator):
        negate(parse("x = 0"))


def test_classify():
    assert classify(parse("x>=0 & y>=0")) == {GEQ, AND}
    assert classify(parse("x^2+y^2-c^2 = 0")) == {EQ}
    assert classify(parse("x > 0")) == {GT}
    assert parse_opclass("geq,and") == {GEQ, AND}


def test_is_open():
    assert is_open(parse("x > 0"))
    assert not is_open(parse("x >= 0"))
    assert is_open(parse("x > 0 & y > 1"))


def test_prop_equivalent():
    f = parse("x >= 0")
    assert prop_equivalent(And(f, f), f)
    assert prop_equivalent(parse("x>=0 | y>=0"), parse("y>=0 | x>=0"))
    assert not prop_equivalent(parse("x >= 0"), parse("x > 0"))


rels = st.sampled_from([">=", ">", "<=", "<", "="])
terms = st.sampled_from(["x", "y", "x^2 - y", "2*x*y + 1", "-x + 3", "x^3 - x"])


@st.composite
def formulas(draw, depth=2):
    if depth == 0 or draw(st.booleans()):
        return parse(f"{draw(terms)} {draw(rels)} {draw(terms)}")
    op = draw(st.sampled_from(["&", "|"]))
    return parse(f"({draw(formulas(depth - 1))}) {op} ({draw(formulas(depth - 1))})")


@given(formulas())
def test_print_parse_roundtrip(f):
    assert parse(str(f)) == f


@given(terms, st.sampled_from([">=", ">"]), terms)
def test_duality(a, rel, b):
    atom = parse(f"{a} {rel} {b}")
    neg = parse(f"!({a} {rel} {b})")
    assert neg.poly == -atom.poly
    assert neg.rel == (GT if rel == ">=" else GEQ)
    assert parse(f"!!({a} {rel} {b})") == atom


@given(formulas(), formulas())
def test_classify_monotone(f, g):
    assert classify(And(f, g)) >= classify(f) | classify(g) | {AND}
    assert classify(Or(f, g)) >= classify(f) | classify(g) | {OR}


@given(formulas(), st.integers(-3, 3), st.integers(-3, 3))
def test_negation_flips_truth(f, a, b):
    if any(atom.rel == EQ for atom in _atoms(f)):
        return
    pt = {"x": a, "y": b}
    assert holds_at(negate(f), pt) == (not holds_at(f, pt))


def _atoms(f):
    from diffinv.formulas import atoms

    return list(atoms(f))

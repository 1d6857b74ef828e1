"""Quantifier-free real-arithmetic formulas in negation normal form.

Every atom compares a polynomial against 0 with one of ``=``, ``>=``, ``>``;
``<=`` and ``<`` are ingested by negating the polynomial.  Negation,
implication and biimplication exist only in the surface syntax and are
eliminated by the parser.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Union

from .terms import Number, Polynomial

EQ, GEQ, GT = "=", ">=", ">"
AND, OR = "&", "|"
RELATIONS = (EQ, GEQ, GT)
OPERATORS = frozenset({EQ, GEQ, GT, AND, OR})

# command-line names of the operators
OPERATOR_NAMES = {"eq": EQ, "geq": GEQ, "gt": GT, "and": AND, "or": OR}

OperatorClass = frozenset


class ParseError(SyntaxError):
    def __init__(self, msg: str, text: str = "", pos: int = 0):
        super().__init__(f"{msg} at position {pos}: {text!r}")
        self.msg_text = msg
        self.pos = pos


class UnsupportedOperator(ParseError):
    """Disequations, division by non-constants, or negated equations."""


@dataclass(frozen=True)
class Atom:
    poly: Polynomial
    rel: str

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"relation {self.rel!r} is not normalized")

    @property
    def is_trivial(self) -> bool:
        """Constant atoms carry no information about the state."""
        return self.poly.is_constant

    def holds(self, value: Fraction) -> bool:
        return _REL_TEST[self.rel](value)

    def __str__(self) -> str:
        return f"{self.poly} {self.rel} 0"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} & {_wrap(self.right)}"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} | {_wrap(self.right)}"


@dataclass(frozen=True)
class Truth:
    value: bool

    def __str__(self) -> str:
        return "true" if self.value else "false"


Formula = Union[Atom, And, Or, Truth]

TRUE = Truth(True)
FALSE = Truth(False)

_REL_TEST: dict[str, Callable[[Fraction], bool]] = {
    EQ: lambda v: v == 0,
    GEQ: lambda v: v >= 0,
    GT: lambda v: v > 0,
}


def _wrap(f: Formula) -> str:
    return f"({f})" if isinstance(f, (And, Or)) else str(f)


# -- constructors --------------------------------------------------------------


def geq(p: Polynomial) -> Atom:
    return Atom(p, GEQ)


def gt(p: Polynomial) -> Atom:
    return Atom(p, GT)


def eq(p: Polynomial) -> Atom:
    return Atom(p, EQ)


def conj(*fs: Formula) -> Formula:
    """Left-nested conjunction; ``conj()`` is true."""
    fs = tuple(fs)
    if not fs:
        return TRUE
    out = fs[0]
    for f in fs[1:]:
        out = And(out, f)
    return out


def disj(*fs: Formula) -> Formula:
    fs = tuple(fs)
    if not fs:
        return FALSE
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def negate(f: Formula) -> Formula:
    """NNF negation using the dual relations."""
    if isinstance(f, Atom):
        if f.rel == GEQ:
            return Atom(-f.poly, GT)
        if f.rel == GT:
            return Atom(-f.poly, GEQ)
        raise UnsupportedOperator("negated equation would need !=", str(f))
    if isinstance(f, And):
        return Or(negate(f.left), negate(f.right))
    if isinstance(f, Or):
        return And(negate(f.left), negate(f.right))
    return Truth(not f.value)


# -- traversal -----------------------------------------------------------------


def atoms(f: Formula) -> Iterator[Atom]:
    if isinstance(f, Atom):
        yield f
    elif isinstance(f, (And, Or)):
        yield from atoms(f.left)
        yield from atoms(f.right)


def conjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    if f == TRUE:
        return []
    return [f]


def disjuncts(f: Formula) -> list[Formula]:
    if isinstance(f, Or):
        return disjuncts(f.left) + disjuncts(f.right)
    if f == FALSE:
        return []
    return [f]


def variables(f: Formula) -> frozenset[str]:
    out: set[str] = set()
    for a in atoms(f):
        out |= a.poly.variables
    return frozenset(out)


def map_atoms(f: Formula, fn: Callable[[Atom], Formula]) -> Formula:
    if isinstance(f, Atom):
        return fn(f)
    if isinstance(f, And):
        return And(map_atoms(f.left, fn), map_atoms(f.right, fn))
    if isinstance(f, Or):
        return Or(map_atoms(f.left, fn), map_atoms(f.right, fn))
    return f


def evaluate_with(f: Formula, atom_value: Callable[[Atom], bool]) -> bool:
    if isinstance(f, Atom):
        return atom_value(f)
    if isinstance(f, And):
        return evaluate_with(f.left, atom_value) and evaluate_with(f.right, atom_value)
    if isinstance(f, Or):
        return evaluate_with(f.left, atom_value) or evaluate_with(f.right, atom_value)
    return f.value


def holds_at(f: Formula, point: Mapping[str, Number]) -> bool:
    """Exact truth value at a rational point."""
    return evaluate_with(f, lambda a: a.holds(a.poly.evaluate(point)))


def substitute(f: Formula, mapping: Mapping[str, Polynomial]) -> Formula:
    return map_atoms(f, lambda a: Atom(a.poly.substitute(mapping), a.rel))


def total_degree(f: Formula) -> int:
    return max((a.poly.degree() for a in atoms(f)), default=0)


# -- operator classes ----------------------------------------------------------


def classify(f: Formula) -> OperatorClass:
    """Minimal operator set over {>=, >, =, &, |} used by ``f``."""
    if isinstance(f, Atom):
        return frozenset({f.rel})
    if isinstance(f, And):
        return classify(f.left) | classify(f.right) | {AND}
    if isinstance(f, Or):
        return classify(f.left) | classify(f.right) | {OR}
    return frozenset()


def parse_opclass(spec: str) -> OperatorClass:
    """Parse a comma list such as ``geq,and``."""
    out = set()
    for name in spec.split(","):
        name = name.strip().lower()
        if not name:
            continue
        if name in OPERATOR_NAMES:
            out.add(OPERATOR_NAMES[name])
        elif name in OPERATORS:
            out.add(name)
        else:
            raise ValueError(f"unknown operator {name!r}")
    return frozenset(out)


def is_open(f: Formula) -> bool:
    """True iff every atom is strict, so the formula denotes an open set."""
    return all(a.rel == GT for a in atoms(f))


def prop_equivalent(f: Formula, g: Formula, max_atoms: int = 16) -> bool:
    """Propositional equivalence with distinct atoms as opaque letters.

    Constant atoms are replaced by their truth value first.
    """
    letters = sorted({a for a in itertools.chain(atoms(f), atoms(g)) if not a.is_trivial}, key=str)
    if len(letters) > max_atoms:
        raise ValueError("too many atoms for truth-table check")
    index = {a: i for i, a in enumerate(letters)}
    for bits in itertools.product((False, True), repeat=len(letters)):
        def val(a: Atom) -> bool:
            if a.is_trivial:
                return a.holds(a.poly.constant_value)
            return bits[index[a]]

        if evaluate_with(f, val) != evaluate_with(g, val):
            return False
    return True


# -- parsing -------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)|(?P<id>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><->|->|>=|<=|!=|==|[-+*/^()<>=&|!]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError("unexpected character", text, pos)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.toks[self.i]

    def take(self, value: str | None = None) -> tuple[str, str, int]:
        tok = self.toks[self.i]
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}", self.text, tok[2])
        self.i += 1
        return tok

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, self.text, self.peek()[2])

    def at(self, *values: str) -> bool:
        return self.peek()[1] in values and self.peek()[0] != "end"

    def finish(self):
        if self.peek()[0] != "end":
            raise self.error("trailing input")

    # terms

    def term(self) -> Polynomial:
        p = self.product()
        while self.at("+", "-"):
            op = self.take()[1]
            q = self.product()
            p = p + q if op == "+" else p - q
        return p

    def product(self) -> Polynomial:
        p = self.unary()
        while self.at("*", "/"):
            op, _, pos = self.take()[1], None, self.peek()[2]
            q = self.unary()
            if op == "*":
                p = p * q
            else:
                if not q.is_constant or not q:
                    raise UnsupportedOperator("division only by nonzero constants", self.text, pos)
                p = p.scale(1 / q.constant_value)
        return p

    def unary(self) -> Polynomial:
        if self.at("-"):
            self.take()
            return -self.unary()
        if self.at("+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Polynomial:
        base = self.primary()
        if self.at("^"):
            self.take()
            kind, val, pos = self.take()
            if kind != "num":
                raise ParseError("exponent must be a natural literal", self.text, pos)
            base = base ** int(val)
        return base

    def primary(self) -> Polynomial:
        kind, val, pos = self.peek()
        if kind == "num":
            self.take()
            return Polynomial.const(int(val))
        if kind == "id":
            if val in ("true", "false"):
                raise self.error("boolean constant in term")
            self.take()
            return Polynomial.var(val)
        if val == "(":
            self.take()
            p = self.term()
            self.take(")")
            return p
        raise self.error("expected term")

    # formulas

    def formula(self) -> Formula:
        f = self.implication()
        while self.at("<->"):
            self.take()
            g = self.implication()
            f = Or(And(f, g), And(negate(f), negate(g)))
        return f

    def implication(self) -> Formula:
        f = self.disjunction()
        if self.at("->"):
            self.take()
            g = self.implication()
            return Or(negate(f), g)
        return f

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.at("|"):
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.negation()
        while self.at("&"):
            self.take()
            f = And(f, self.negation())
        return f

    def negation(self) -> Formula:
        if self.at("!"):
            self.take()
            return negate(self.negation())
        kind, val, _ = self.peek()
        if kind == "id" and val in ("true", "false"):
            self.take()
            return TRUE if val == "true" else FALSE
        if val == "(":
            save = self.i
            try:
                return self.comparison()
            except UnsupportedOperator:
                raise
            except ParseError:
                self.i = save
            self.take("(")
            f = self.formula()
            self.take(")")
            return f
        return self.comparison()

    def comparison(self) -> Formula:
        lhs = self.term()
        kind, op, pos = self.peek()
        if op == "!=":
            raise UnsupportedOperator("!= is not supported", self.text, pos)
        if op not in (">=", "<=", ">", "<", "=", "=="):
            raise self.error("expected relation")
        self.take()
        rhs = self.term()
        if op in ("=", "=="):
            return Atom(lhs - rhs, EQ)
        if op == ">=":
            return Atom(lhs - rhs, GEQ)
        if op == ">":
            return Atom(lhs - rhs, GT)
        if op == "<=":
            return Atom(rhs - lhs, GEQ)
        return Atom(rhs - lhs, GT)


def parse(text: str) -> Formula:
    """Parse surface syntax into an NNF formula with right-hand sides 0."""
    p = _Parser(text)
    f = p.formula()
    p.finish()
    return f


def parse_term(text: str) -> Polynomial:
    p = _Parser(text)
    t = p.term()
    p.finish()
    return t

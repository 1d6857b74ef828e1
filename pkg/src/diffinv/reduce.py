"""Equivalence-preserving rewrites between operator classes."""

from __future__ import annotations

from .formulas import EQ, GEQ, AND, OR, And, Atom, Formula, Or, Truth, classify, map_atoms
from .terms import Polynomial


class NotEquational(ValueError):
    pass


class NotEquation(ValueError):
    pass


def normalize_rhs_zero(f: Formula) -> Formula:
    # Parsed formulas already keep every atom as ``p rel 0``; rebuilding
    # the tree re-checks that and drops nothing.
    return map_atoms(f, lambda a: Atom(a.poly, a.rel))


def equational_collapse(f: Formula) -> Atom:
    """Fold an equational formula into one equation.

    A disjunction of zeros is the zero set of the product, a conjunction
    that of the sum of squares.
    """
    if isinstance(f, Truth) or not classify(f) <= {EQ, AND, OR}:
        raise NotEquational(f"{f} is not built from equations, & and |")

    def fold(g: Formula) -> Polynomial:
        if isinstance(g, Atom):
            return g.poly
        left, right = fold(g.left), fold(g.right)
        if isinstance(g, Or):
            return left * right
        return left**2 + right**2

    return Atom(fold(f), EQ)


def _equation(a: Formula) -> Polynomial:
    if not (isinstance(a, Atom) and a.rel == EQ):
        raise NotEquation(f"{a} is not an equation")
    return a.poly


def eq_to_weak(a: Atom) -> Atom:
    p = _equation(a)
    return Atom(-(p**2), GEQ)


def eq_to_conj_weak(a: Atom) -> Formula:
    p = _equation(a)
    return And(Atom(p, GEQ), Atom(-p, GEQ))


REDUCTIONS = {
    "normalize": normalize_rhs_zero,
    "collapse": equational_collapse,
    "eq-to-weak": lambda f: eq_to_weak(equational_collapse(f)),
    "eq-to-conj-weak": lambda f: eq_to_conj_weak(equational_collapse(f)),
}

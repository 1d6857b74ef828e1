"""Exact multivariate polynomials over the rationals.

Polynomials are immutable and canonical: two equal polynomials have
identical term maps, so ``==`` and ``hash`` are structural.  Variables are
plain strings ordered by name; monomials store their exponents sorted by
that ordering.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Iterable, Iterator, Mapping, Sequence, Union

MAX_EXPONENT = 1 << 16

Number = Union[int, Fraction]


class MissingAssignment(KeyError):
    """A variable of the polynomial has no value at the evaluation point."""


class ZeroPolynomial(ValueError):
    """Operation undefined on the zero polynomial."""


class ExponentOverflow(OverflowError):
    """An exponent exceeded MAX_EXPONENT."""


class Monomial(tuple):
    """Power product stored as sorted ``(variable, exponent)`` pairs.

    The empty monomial is the constant 1.  Zero exponents are never stored.
    """

    __slots__ = ()

    def __new__(cls, powers: Union[Mapping[str, int], Iterable[tuple[str, int]]] = ()):
        items = powers.items() if isinstance(powers, Mapping) else powers
        merged: dict[str, int] = {}
        for var, exp in items:
            if exp < 0:
                raise ValueError(f"negative exponent for {var}")
            merged[var] = merged.get(var, 0) + exp
        for var, exp in merged.items():
            if exp > MAX_EXPONENT:
                raise ExponentOverflow(f"exponent {exp} of {var} exceeds {MAX_EXPONENT}")
        return super().__new__(cls, tuple(sorted((v, e) for v, e in merged.items() if e)))

    @property
    def degree(self) -> int:
        return sum(e for _, e in self)

    @property
    def exponents(self) -> dict[str, int]:
        return dict(self)

    def exponent(self, var: str) -> int:
        for v, e in self:
            if v == var:
                return e
        return 0

    def __mul__(self, other: "Monomial") -> "Monomial":  # type: ignore[override]
        return Monomial(tuple(self) + tuple(other))

    def is_even(self) -> bool:
        return all(e % 2 == 0 for _, e in self)

    def __repr__(self) -> str:
        return f"Monomial({dict(self)!r})"

    def __str__(self) -> str:
        if not self:
            return "1"
        return "*".join(v if e == 1 else f"{v}^{e}" for v, e in self)


ONE_MONOMIAL = Monomial()


def _graded_key(m: Monomial):
    # descending total degree, then lexicographic by variable name
    return (-m.degree, tuple((v, -e) for v, e in m))


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class Polynomial:
    """Immutable polynomial with rational coefficients."""

    __slots__ = ("_terms", "_hash", "_vars", "_intform")

    def __init__(self, terms: Union[Mapping[Monomial, Number], Iterable[tuple[Monomial, Number]]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Monomial, Fraction] = {}
        for mono, coeff in items:
            if not isinstance(mono, Monomial):
                mono = Monomial(mono)
            acc[mono] = acc.get(mono, Fraction(0)) + Fraction(coeff)
        self._terms = {m: c for m, c in acc.items() if c != 0}
        self._hash = None
        self._vars = None
        self._intform = None

    @classmethod
    def _raw(cls, terms: dict[Monomial, Fraction]) -> "Polynomial":
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        p._vars = None
        p._intform = None
        return p

    @classmethod
    def const(cls, c: Number) -> "Polynomial":
        c = Fraction(c)
        return cls._raw({ONE_MONOMIAL: c} if c else {})

    @classmethod
    def var(cls, name: str) -> "Polynomial":
        return cls._raw({Monomial({name: 1}): Fraction(1)})

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls._raw({})

    # -- structure ---------------------------------------------------------

    @property
    def terms(self) -> Mapping[Monomial, Fraction]:
        return self._terms

    def __iter__(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(sorted(self._terms.items(), key=lambda t: _graded_key(t[0])))

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    @property
    def variables(self) -> frozenset[str]:
        if self._vars is None:
            self._vars = frozenset(v for m in self._terms for v, _ in m)
        return self._vars

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((m.degree for m in self._terms), default=-1)

    def degree_in(self, var: str) -> int:
        return max((m.exponent(var) for m in self._terms), default=-1)

    @property
    def is_constant(self) -> bool:
        return all(not m for m in self._terms)

    @property
    def constant_value(self) -> Fraction:
        return self._terms.get(ONE_MONOMIAL, Fraction(0))

    def coefficient(self, mono: Monomial) -> Fraction:
        return self._terms.get(mono, Fraction(0))

    # -- ring operations ---------------------------------------------------

    @staticmethod
    def _coerce(other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.const(other)
        return NotImplemented

    def __add__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._terms)
        for m, c in other._terms.items():
            s = acc.get(m, 0) + c
            if s:
                acc[m] = s
            else:
                acc.pop(m, None)
        return Polynomial._raw(acc)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw({m: -c for m, c in self._terms.items()})

    def __sub__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Polynomial":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc: dict[Monomial, Fraction] = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                m = m1 * m2 if m1 and m2 else (m1 or m2)
                s = acc.get(m, 0) + c1 * c2
                if s:
                    acc[m] = s
                else:
                    acc.pop(m, None)
        return Polynomial._raw(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power")
        if n > MAX_EXPONENT:
            raise ExponentOverflow(f"power {n} exceeds {MAX_EXPONENT}")
        result = Polynomial.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def scale(self, c: Number) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return Polynomial.zero()
        return Polynomial._raw({m: v * c for m, v in self._terms.items()})

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Polynomial.const(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    # -- calculus and evaluation ------------------------------------------

    def partial(self, var: str) -> "Polynomial":
        acc: dict[Monomial, Fraction] = {}
        for m, c in self._terms.items():
            e = m.exponent(var)
            if not e:
                continue
            dm = Monomial(tuple((v, k - 1 if v == var else k) for v, k in m))
            acc[dm] = acc.get(dm, 0) + c * e
        return Polynomial(acc)

    def evaluate(self, point: Mapping[str, Number]) -> Fraction:
        total = Fraction(0)
        for m, c in self._terms.items():
            term = c
            for v, e in m:
                try:
                    term *= Fraction(point[v]) ** e
                except KeyError:
                    raise MissingAssignment(v) from None
            total += term
        return total

    def int_form(self) -> tuple[int, tuple[tuple[int, Monomial], ...]]:
        """Positive scale factor L and integer terms of ``L * self``."""
        if self._intform is None:
            den = lcm(*(c.denominator for c in self._terms.values())) if self._terms else 1
            self._intform = (den, tuple((int(c * den), m) for m, c in self._terms.items()))
        return self._intform

    def sign_at_int(self, point: Mapping[str, int]) -> int:
        """Sign of the value at an integer point, computed in pure int arithmetic."""
        _, terms = self.int_form()
        total = 0
        for c, m in terms:
            t = c
            for v, e in m:
                t *= point[v] ** e
            total += t
        return (total > 0) - (total < 0)

    def substitute(self, mapping: Mapping[str, "Polynomial"]) -> "Polynomial":
        result = Polynomial.zero()
        for m, c in self._terms.items():
            term = Polynomial.const(c)
            rest = []
            for v, e in m:
                if v in mapping:
                    term = term * mapping[v] ** e
                else:
                    rest.append((v, e))
            if rest:
                term = term * Polynomial._raw({Monomial(rest): Fraction(1)})
            result = result + term
        return result

    # -- orderings, division, roots ---------------------------------------

    def leading_lex(self, order: Sequence[str]) -> tuple[Monomial, Fraction]:
        if not self._terms:
            raise ZeroPolynomial("zero polynomial has no leading monomial")
        rank = {v: i for i, v in enumerate(order)}
        tail = sorted(self.variables - rank.keys())
        for v in tail:
            rank[v] = len(rank)
        width = len(rank)

        def key(m: Monomial):
            vec = [0] * width
            for v, e in m:
                vec[rank[v]] = e
            return vec

        mono = max(self._terms, key=key)
        return mono, self._terms[mono]

    def _lex_leading(self) -> tuple[Monomial, Fraction]:
        return self.leading_lex(sorted(self.variables))

    def exact_quotient(self, divisor: "Polynomial") -> "Polynomial | None":
        """``q`` with ``q * divisor == self``, or None if the division is not exact."""
        if not divisor:
            raise ZeroPolynomial("division by zero polynomial")
        if not self:
            return Polynomial.zero()
        order = sorted(self.variables | divisor.variables)
        lm_d, lc_d = divisor.leading_lex(order)
        d_exp = dict(lm_d)
        remainder = self
        quotient = Polynomial.zero()
        while remainder:
            lm_r, lc_r = remainder.leading_lex(order)
            r_exp = dict(lm_r)
            if any(r_exp.get(v, 0) < e for v, e in d_exp.items()):
                return None
            q_mono = Monomial({v: e - d_exp.get(v, 0) for v, e in r_exp.items()})
            step = Polynomial._raw({q_mono: lc_r / lc_d})
            quotient = quotient + step
            remainder = remainder - step * divisor
        return quotient

    def sqrt(self) -> "Polynomial | None":
        """Exact polynomial square root with positive lex-leading coefficient, if one exists."""
        if not self:
            return Polynomial.zero()
        order = sorted(self.variables)
        lm, lc = self.leading_lex(order)
        if lc < 0 or not lm.is_even():
            return None
        root_c = _rational_sqrt(lc)
        if root_c is None:
            return None
        lead = Polynomial._raw({Monomial({v: e // 2 for v, e in lm}): root_c})
        root = lead
        remainder = self - root * root
        budget = len(self._terms) + self.degree() * 4 + 8
        while remainder and budget:
            budget -= 1
            lm_r, lc_r = remainder.leading_lex(order)
            lead_m = next(iter(lead.terms))
            r_exp = dict(lm_r)
            if any(r_exp.get(v, 0) < e for v, e in lead_m):
                return None
            mono = Monomial({v: e - lead_m.exponent(v) for v, e in r_exp.items()})
            step = Polynomial._raw({mono: lc_r / (2 * root_c)})
            root = root + step
            remainder = self - root * root
        return root if not remainder else None

    def primitive(self) -> tuple[Fraction, "Polynomial"]:
        """Split into positive content and a primitive integer polynomial."""
        if not self:
            return Fraction(1), self
        from math import gcd

        den, terms = self.int_form()
        g = 0
        for c, _ in terms:
            g = gcd(g, c)
        content = Fraction(abs(g), den)
        return content, self.scale(1 / content)

    # -- display -----------------------------------------------------------

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for m, c in self:
            neg = c < 0
            a = -c if neg else c
            if not m:
                body = _fmt_coeff(a)
            elif a == 1:
                body = str(m)
            else:
                body = f"{_fmt_coeff(a)}*{m}"
            if not parts:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f" - {body}" if neg else f" + {body}")
        return "".join(parts)

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r})"


def _rational_sqrt(q: Fraction) -> "Fraction | None":
    from math import isqrt

    n, d = q.numerator, q.denominator
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


# -- functional surface ----------------------------------------------------


def add(a: Polynomial, b: Polynomial) -> Polynomial:
    return a + b


def mul(a: Polynomial, b: Polynomial) -> Polynomial:
    return a * b


def partial_derivative(p: Polynomial, var: str) -> Polynomial:
    return p.partial(var)


def evaluate(p: Polynomial, point: Mapping[str, Number]) -> Fraction:
    """Exact value of ``p`` at ``point``; raises MissingAssignment for unassigned variables."""
    return p.evaluate(point)


def leading_monomial_lex(p: Polynomial, order: Sequence[str]) -> tuple[Monomial, Fraction]:
    """Lex-greatest monomial of ``p`` under the precedence ``order`` (first variable dominates)."""
    return p.leading_lex(order)


def var(name: str) -> Polynomial:
    return Polynomial.var(name)


def const(c: Number) -> Polynomial:
    return Polynomial.const(c)

"""Sound, incomplete validity oracle for quantifier-free real arithmetic.

``decide`` answers Valid (with the name of the tier that proved it),
Invalid (with an exact rational counterexample), or Unknown.  Tiers run
cheapest first; the falsification grid is the only source of Invalid.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .formulas import (
    EQ,
    GEQ,
    GT,
    And,
    Atom,
    Formula,
    Or,
    Truth,
    atoms,
    conjuncts,
    evaluate_with,
    holds_at,
)
from .formulas import variables as formula_variables
from .terms import Monomial, Polynomial, ZeroPolynomial

VALID, INVALID, UNKNOWN_STATUS = "valid", "invalid", "unknown"

# certificate tags, in tier order
CERTIFICATES = ("propositional", "identity", "even-sign", "assumption-sign", "sturm")


@dataclass(frozen=True)
class Verdict:
    status: str
    certificate: Optional[str] = None
    witness: Optional[Mapping[str, Fraction]] = None
    path: Optional[tuple[int, ...]] = None

    @classmethod
    def valid(cls, certificate: str) -> "Verdict":
        return cls(VALID, certificate=certificate)

    @classmethod
    def invalid(cls, witness: Mapping[str, Fraction], path=None) -> "Verdict":
        return cls(INVALID, witness=dict(sorted(witness.items())), path=path)

    @property
    def is_valid(self) -> bool:
        return self.status == VALID

    @property
    def is_invalid(self) -> bool:
        return self.status == INVALID

    @property
    def is_unknown(self) -> bool:
        return self.status == UNKNOWN_STATUS

    def __str__(self) -> str:
        if self.status == VALID:
            return f"Valid({self.certificate})"
        if self.status == INVALID:
            pt = ", ".join(f"{k}={v}" for k, v in (self.witness or {}).items())
            return f"Invalid({pt})"
        return "Unknown"


UNKNOWN = Verdict(UNKNOWN_STATUS)


@dataclass(frozen=True)
class OracleConfig:
    grid_radius: int = 5
    grid_limit: int = 4096
    random_samples: int = 1000
    random_bound: int = 100
    max_prop_atoms: int = 12
    max_case_splits: int = 4


DEFAULT_CONFIG = OracleConfig()


# -- dense univariate helpers ------------------------------------------------
# Coefficient lists run from the constant term upwards and carry no
# trailing zeros; the zero polynomial is [].

Dense = list


def _trim(p: Dense) -> Dense:
    while p and p[-1] == 0:
        p.pop()
    return p


def _dense(p: Polynomial, var: str) -> Dense:
    deg = max(p.degree_in(var), 0)
    out = [Fraction(0)] * (deg + 1)
    for m, c in p.terms.items():
        out[m.exponent(var)] += c
    return _trim(out)


def _from_dense(p: Dense, var: str) -> Polynomial:
    return Polynomial({Monomial({var: i}): c for i, c in enumerate(p)})


def _deriv(p: Dense) -> Dense:
    return _trim([c * i for i, c in enumerate(p)][1:])


def _mul(a: Dense, b: Dense) -> Dense:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def _divmod(a: Dense, b: Dense) -> tuple[Dense, Dense]:
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    r = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    lead = b[-1]
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        f = r[-1] / lead
        q[shift] = f
        for i, c in enumerate(b):
            r[i + shift] -= f * c
        _trim(r)
    return _trim(q), r


def _gcd(a: Dense, b: Dense) -> Dense:
    a, b = list(a), list(b)
    while b:
        a, b = b, _divmod(a, b)[1]
    if not a:
        return a
    lead = a[-1]
    return [c / lead for c in a]


def _eval(p: Dense, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _sign(v) -> int:
    return (v > 0) - (v < 0)


# -- Sturm chains ------------------------------------------------------------


@dataclass(frozen=True)
class SturmChain:
    var: str
    polys: tuple[Polynomial, ...]
    dense: tuple[tuple[Fraction, ...], ...] = field(repr=False, compare=False, default=())

    def __iter__(self):
        return iter(self.polys)

    def __len__(self):
        return len(self.polys)

    def sign_changes_at(self, x: Fraction) -> int:
        return _variations(_sign(_eval(list(p), x)) for p in self.dense)

    def sign_changes_at_infinity(self, positive: bool) -> int:
        signs = []
        for p in self.dense:
            s = _sign(p[-1])
            if not positive and (len(p) - 1) % 2:
                s = -s
            signs.append(s)
        return _variations(signs)


def _variations(signs: Iterable[int]) -> int:
    count, last = 0, 0
    for s in signs:
        if s == 0:
            continue
        if last and s != last:
            count += 1
        last = s
    return count


def _single_var(p: Polynomial) -> str:
    vs = p.variables
    if len(vs) > 1:
        raise ValueError(f"{p} is not univariate")
    return next(iter(vs)) if vs else "x"


def _chain_dense(p: Dense) -> list[Dense]:
    chain = [p, _deriv(p)]
    if not chain[1]:
        return chain[:1]
    while True:
        r = _divmod(chain[-2], chain[-1])[1]
        if not r:
            return chain
        chain.append([-c for c in r])


def sturm_chain(p: Polynomial, var: Optional[str] = None) -> SturmChain:
    """Sturm chain: p, p', then negated remainders until the remainder vanishes."""
    if not p:
        raise ZeroPolynomial("Sturm chain of the zero polynomial")
    var = var or _single_var(p)
    dense = _chain_dense(_dense(p, var))
    return SturmChain(var, tuple(_from_dense(d, var) for d in dense), tuple(tuple(d) for d in dense))


def count_real_roots(chain: SturmChain) -> int:
    """Number of distinct real roots of the chain's first polynomial."""
    return chain.sign_changes_at_infinity(False) - chain.sign_changes_at_infinity(True)


def count_roots_between(chain: SturmChain, a: Fraction, b: Fraction) -> int:
    """Distinct roots in (a, b]; a must not be a root."""
    return chain.sign_changes_at(Fraction(a)) - chain.sign_changes_at(Fraction(b))


def _root_bound(p: Dense) -> Fraction:
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def _isolate(p: Dense) -> list[tuple[Fraction, Fraction]]:
    """Disjoint intervals (a, b] each holding exactly one root of squarefree p.

    Endpoints are never roots.
    """
    if len(p) <= 1:
        return []
    chain = SturmChain("_", (), tuple(tuple(d) for d in _chain_dense(p)))
    bound = _root_bound(p) + 1
    out = []
    stack = [(-bound, bound)]
    while stack:
        a, b = stack.pop()
        n = chain.sign_changes_at(a) - chain.sign_changes_at(b)
        if n == 0:
            continue
        if n == 1:
            out.append((a, b))
            continue
        m = (a + b) / 2
        k = 1
        while _eval(p, m) == 0:
            m = (a + b) / 2 + (b - a) / (1000 * k + 1)
            k += 1
        stack.append((m, b))
        stack.append((a, m))
    out.sort()
    return out


def _cells(polys: Sequence[Dense]) -> Iterator[tuple[Optional[Fraction], list[int]]]:
    """Sign vectors of ``polys`` on every cell of the real line.

    Yields ``(sample, signs)`` where sample is a rational point for open
    cells and None for (possibly irrational) root cells.
    """
    product: Dense = [Fraction(1)]
    for p in polys:
        product = _mul(product, p)
    if len(product) <= 1:
        yield Fraction(0), [_sign(_eval(p, Fraction(0))) for p in polys]
        return
    sqfree = _divmod(product, _gcd(product, _deriv(product)))[0]
    intervals = _isolate(sqfree)

    def at(x: Fraction):
        return x, [_sign(_eval(p, x)) for p in polys]

    if not intervals:
        yield at(Fraction(0))
        return
    yield at(intervals[0][0] - 1)
    for i, (a, b) in enumerate(intervals):
        signs = []
        for p in polys:
            g = _gcd(sqfree, p)
            if len(g) > 1:
                gchain = SturmChain("_", (), tuple(tuple(d) for d in _chain_dense(g)))
                if gchain.sign_changes_at(a) - gchain.sign_changes_at(b) == 1:
                    signs.append(0)
                    continue
            signs.append(_sign(_eval(p, b)))
        yield None, signs
        yield at(b if i + 1 < len(intervals) else b + 1)


# -- tiers -------------------------------------------------------------------

_REL_SIGNS = {EQ: frozenset({0}), GEQ: frozenset({0, 1}), GT: frozenset({1})}


def _sign_ok(rel: str, s: int) -> bool:
    return s in _REL_SIGNS[rel]


def _atom_truth_const(a: Atom) -> Optional[bool]:
    if a.is_trivial:
        return a.holds(a.poly.constant_value)
    return None


def _simplify(f: Formula) -> Formula:
    """Fold constant atoms into truth values."""
    if isinstance(f, Atom):
        t = _atom_truth_const(f)
        return f if t is None else Truth(t)
    if isinstance(f, (And, Or)):
        l, r = _simplify(f.left), _simplify(f.right)
        is_and = isinstance(f, And)
        for x, y in ((l, r), (r, l)):
            if isinstance(x, Truth):
                if x.value == is_and:
                    return y
                return x
        return And(l, r) if is_and else Or(l, r)
    return f


def _propositional(assumptions: Sequence[Formula], goal: Formula, limit: int) -> bool:
    letters = sorted({a for f in (*assumptions, goal) for a in atoms(f)}, key=str)
    if len(letters) > limit:
        return False
    index = {a: i for i, a in enumerate(letters)}
    for bits in itertools.product((False, True), repeat=len(letters)):
        val = lambda a: bits[index[a]]  # noqa: E731
        if all(evaluate_with(f, val) for f in assumptions) and not evaluate_with(goal, val):
            return False
    return True


def _even_sign(a: Atom) -> bool:
    p = a.poly
    if not all(m.is_even() for m in p.terms):
        return False
    coeffs = list(p.terms.values())
    if all(c > 0 for c in coeffs):
        return a.rel == GEQ or (a.rel == GT and p.constant_value > 0)
    return False


_IMPLIES = {GT: {GT, GEQ}, GEQ: {GEQ}, EQ: {EQ, GEQ}}


class _Facts:
    """Sign knowledge extracted from atomic assumptions."""

    def __init__(self, assumption_atoms: Sequence[Atom]):
        self.atoms = list(assumption_atoms)
        self.var_signs: dict[str, frozenset[int]] = {}
        self.zeros: list[Polynomial] = []
        for a in self.atoms:
            p = a.poly
            if len(p) == 1:
                (m, c), = p.terms.items()
                if len(m) == 1 and m.degree == 1:
                    v = m[0][0]
                    s = _REL_SIGNS[a.rel] if c > 0 else frozenset(-x for x in _REL_SIGNS[a.rel])
                    self.var_signs[v] = self.var_signs.get(v, frozenset({-1, 0, 1})) & s
            if a.rel == EQ:
                self.zeros.append(p)
            elif a.rel == GEQ:
                content, prim = (-p).primitive()
                root = prim.sqrt()
                if root is not None and root:
                    self.zeros.append(root)
        for a1, a2 in itertools.combinations([a for a in self.atoms if a.rel == GEQ], 2):
            ratio = _ratio(a1.poly, a2.poly)
            if ratio is not None and ratio < 0:
                self.zeros.append(a1.poly)
        for v, s in self.var_signs.items():
            if s == frozenset({0}):
                self.zeros.append(Polynomial.var(v))

    def term_signs(self, m: Monomial, c: Fraction) -> frozenset[int]:
        signs = frozenset({_sign(c)})
        for v, e in m:
            vs = self.var_signs.get(v, frozenset({-1, 0, 1}))
            powered = frozenset(s ** e for s in vs)
            signs = frozenset(x * y for x in signs for y in powered)
        return signs

    def proves(self, goal: Atom) -> bool:
        g = goal.poly
        for a in self.atoms:
            ratio = _ratio(g, a.poly)
            if ratio is None:
                continue
            if ratio > 0 and goal.rel in _IMPLIES[a.rel]:
                return True
            if a.rel == EQ and goal.rel in (EQ, GEQ):
                return True
        if goal.rel in (EQ, GEQ):
            for z in self.zeros:
                if g.exact_quotient(z) is not None:
                    return True
        if goal.rel != EQ:
            signed = [a for a in self.atoms if a.rel in (GEQ, GT)]
            for a1, a2 in itertools.combinations_with_replacement(signed, 2):
                ratio = _ratio(g, a1.poly * a2.poly)
                if ratio is not None and ratio > 0:
                    if goal.rel == GEQ or (a1.rel == GT and a2.rel == GT):
                        return True
        if self.var_signs:
            total: frozenset[int] = frozenset({0})
            for m, c in g.terms.items():
                ts = self.term_signs(m, c)
                total = _sum_signs(total, ts)
            if total <= _REL_SIGNS[goal.rel]:
                return True
        return False


def _sum_signs(a: frozenset[int], b: frozenset[int]) -> frozenset[int]:
    out = set()
    for x in a:
        for y in b:
            if x == 0:
                out.add(y)
            elif y == 0 or x == y:
                out.add(x)
            else:
                out.update((-1, 0, 1))
    return frozenset(out)


def _ratio(p: Polynomial, q: Polynomial) -> Optional[Fraction]:
    """c with p == c*q if one exists (c nonzero)."""
    if not p or not q or p.terms.keys() != q.terms.keys():
        return None
    it = iter(p.terms)
    m0 = next(it)
    c = p.terms[m0] / q.terms[m0]
    for m in it:
        if p.terms[m] != c * q.terms[m]:
            return None
    return c


def _sturm(assumptions: Sequence[Formula], goal: Formula) -> bool:
    gv = formula_variables(goal)
    if len(gv) != 1:
        return False
    (v,) = gv
    relevant = [f for f in assumptions if formula_variables(f) <= gv]
    polys: list[Polynomial] = []
    for f in (*relevant, goal):
        for a in atoms(f):
            if not a.is_trivial and a.poly not in polys:
                polys.append(a.poly)
    dense = [_dense(p, v) for p in polys]
    index = {p: i for i, p in enumerate(polys)}
    for _, signs in _cells(dense):
        def val(a: Atom) -> bool:
            if a.is_trivial:
                return a.holds(a.poly.constant_value)
            return _sign_ok(a.rel, signs[index[a.poly]])

        if all(evaluate_with(f, val) for f in relevant) and not evaluate_with(goal, val):
            return False
    return True


_TIER_RANK = {tag: i for i, tag in enumerate(CERTIFICATES)}


def _prove(assumptions: list[Formula], goal: Formula, cfg: OracleConfig, splits: int) -> Optional[str]:
    if any(f == Truth(False) for f in assumptions):
        return "propositional"
    if goal == Truth(True) or goal in assumptions:
        return "propositional"
    if _propositional(assumptions, goal, cfg.max_prop_atoms):
        return "propositional"
    if isinstance(goal, And):
        tags = []
        for c in conjuncts(goal):
            t = _prove(assumptions, c, cfg, splits)
            if t is None:
                break
            tags.append(t)
        else:
            return max(tags, key=_TIER_RANK.__getitem__)
    elif isinstance(goal, Or):
        for d in (goal.left, goal.right):
            t = _prove(assumptions, d, cfg, splits)
            if t is not None:
                return t
    elif isinstance(goal, Atom):
        if goal.is_trivial:
            if goal.holds(goal.poly.constant_value):
                return "identity"
        elif _even_sign(goal):
            return "even-sign"
        elif _Facts([f for f in assumptions if isinstance(f, Atom)]).proves(goal):
            return "assumption-sign"
    if not isinstance(goal, Truth) and _sturm(assumptions, goal):
        return "sturm"
    if splits < cfg.max_case_splits:
        for i, f in enumerate(assumptions):
            if isinstance(f, Or):
                rest = assumptions[:i] + assumptions[i + 1 :]
                tags = []
                for d in (f.left, f.right):
                    t = _prove(rest + conjuncts(d), goal, cfg, splits + 1)
                    if t is None:
                        return None
                    tags.append(t)
                return max(tags, key=_TIER_RANK.__getitem__)
    return None


# -- falsification -----------------------------------------------------------


def _grid_points(names: Sequence[str], radius: int, limit: int) -> Iterator[dict[str, int]]:
    n = len(names)
    count = 0
    if n == 0:
        yield {}
        return
    for r in range(radius + 1):
        ordered = [0]
        for k in range(1, r + 1):
            ordered += [k, -k]
        for combo in itertools.product(ordered, repeat=n):
            if max(abs(c) for c in combo) != r:
                continue
            yield dict(zip(names, combo))
            count += 1
            if count >= limit:
                return


def _int_holds(f: Formula, point: Mapping[str, int]) -> bool:
    return evaluate_with(f, lambda a: _sign_ok(a.rel, a.poly.sign_at_int(point)))


def falsify_sequent(
    assumptions: Sequence[Formula], goal: Formula, seed: int = 0, cfg: OracleConfig = DEFAULT_CONFIG
) -> Optional[dict[str, Fraction]]:
    """Search for a rational point satisfying every assumption and violating the goal."""
    names = sorted(set().union(formula_variables(goal), *(formula_variables(f) for f in assumptions)))
    for point in _grid_points(names, cfg.grid_radius, cfg.grid_limit):
        if not _int_holds(goal, point) and all(_int_holds(f, point) for f in assumptions):
            return {k: Fraction(v) for k, v in point.items()}
    rng = random.Random(seed)
    bound = cfg.random_bound
    for _ in range(cfg.random_samples):
        point = {k: Fraction(rng.randint(-bound, bound), rng.randint(1, bound)) for k in names}
        if not holds_at(goal, point) and all(holds_at(f, point) for f in assumptions):
            return point
    return None


def decide(
    assumptions: Sequence[Formula],
    goal: Formula,
    seed: int = 0,
    config: OracleConfig = DEFAULT_CONFIG,
) -> Verdict:
    """Three-valued validity of ``AND(assumptions) -> goal`` over the reals."""
    flat: list[Formula] = []
    for f in assumptions:
        flat.extend(conjuncts(_simplify(f)) if _simplify(f) != Truth(True) else [])
    flat = list(dict.fromkeys(flat))
    goal_s = _simplify(goal)
    if goal_s == Truth(True) and goal != goal_s:
        # the goal held once its constant atoms were evaluated
        return Verdict.valid("identity")
    tag = _prove(flat, goal_s, config, 0)
    if tag is not None:
        return Verdict.valid(tag)
    witness = falsify_sequent(flat, goal_s, seed, config)
    if witness is not None:
        assert all(holds_at(f, witness) for f in assumptions) and not holds_at(goal, witness)
        return Verdict.invalid(witness)
    return UNKNOWN

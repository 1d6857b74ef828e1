"""Bounded enumeration of differential invariants within an operator class.

Candidates are produced in a fixed order and checked with the arithmetic
oracle; the first candidate whose premises are all Valid wins.  Unknown
verdicts reject a candidate, so anything returned is a checkable proof.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from . import arith
from .arith import OracleConfig, Verdict
from .derivation import derive_formula, lie_derivative
from .formulas import (
    AND,
    EQ,
    GEQ,
    GT,
    OR,
    And,
    Atom,
    Formula,
    Or,
    OperatorClass,
    TRUE,
    atoms,
    classify,
    is_open,
)
from .kernel import Box, ProofNode, Problem, Sequent, check_proof, strengthen
from .scripts import Aux, Cut, Invariant, Script, Weaken, replay
from .terms import Monomial, Polynomial

DEFAULT_POOL = tuple(Fraction(c) for c in (-1, 0, 1))
_QUICK = OracleConfig(grid_radius=2, grid_limit=256, random_samples=0)


@dataclass(frozen=True)
class SearchConfig:
    opclass: OperatorClass
    max_degree: int = 2
    coefficient_pool: tuple[Fraction, ...] = DEFAULT_POOL
    max_atoms: int = 1
    max_cuts: int = 0
    allow_open_di: bool = False
    da_degree: int = 0
    budget: int = 10_000
    seed: int = 0
    strict: bool = False
    oracle: OracleConfig = field(default_factory=OracleConfig)

    def __post_init__(self):
        if not self.coefficient_pool:
            raise ValueError("coefficient pool is empty")
        if self.budget <= 0 or self.max_atoms <= 0 or self.max_degree < 0 or self.max_cuts < 0:
            raise ValueError("bounds must be positive")
        if not self.opclass & {EQ, GEQ, GT}:
            raise ValueError("operator class has no relation")


class BudgetExhausted(Exception):
    pass


class _Budget:
    def __init__(self, limit: int):
        self.left = limit

    def spend(self):
        if self.left <= 0:
            raise BudgetExhausted
        self.left -= 1


# -- enumeration ---------------------------------------------------------------


def _monomials(names: Sequence[str], degree: int) -> list[Monomial]:
    out = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(sorted(names), d):
            out.append(Monomial({v: combo.count(v) for v in set(combo)}))
    return out


def _coefficient_order(pool: Iterable[Fraction]) -> list[Fraction]:
    nonzero = {Fraction(c) for c in pool if c != 0}
    return sorted(nonzero, key=lambda c: (abs(c), c < 0))


def enumerate_polynomials(names: Sequence[str], max_degree: int, pool: Iterable[Fraction]) -> Iterator[Polynomial]:
    """Non-constant polynomials by degree, then term count, then monomials and coefficients."""
    monos = _monomials(names, max_degree)
    coeffs = _coefficient_order(pool)
    for d in range(1, max_degree + 1):
        usable = [m for m in monos if m.degree <= d]
        for k in range(1, len(usable) + 1):
            for combo in itertools.combinations(usable, k):
                if max(m.degree for m in combo) != d:
                    continue
                for cs in itertools.product(coeffs, repeat=k):
                    yield Polynomial(zip(combo, cs))


def _atoms(names: Sequence[str], cfg: SearchConfig) -> Iterator[Atom]:
    rels = [r for r in (GEQ, GT, EQ) if r in cfg.opclass]
    seen: set[tuple[Polynomial, str]] = set()
    for p in enumerate_polynomials(names, cfg.max_degree, cfg.coefficient_pool):
        _, prim = p.primitive()
        for rel in rels:
            if (prim, rel) in seen or (rel == EQ and (-prim, rel) in seen):
                continue
            seen.add((prim, rel))
            yield Atom(p, rel)


def enumerate_candidates(names: Sequence[str], cfg: SearchConfig) -> Iterator[Formula]:
    """Atoms in order, each followed by the combinations it completes.

    When atom n arrives, every formula over earlier atoms with fewer than
    ``max_atoms`` atoms is joined with it under each allowed connective.
    """
    conns = [c for c in (AND, OR) if c in cfg.opclass] if cfg.max_atoms > 1 else []
    by_size: list[list[Formula]] = [[] for _ in range(cfg.max_atoms + 1)]
    for atom in _atoms(names, cfg):
        yield atom
        fresh: list[list[Formula]] = [[] for _ in range(cfg.max_atoms + 1)]
        fresh[1].append(atom)
        for size in range(2, cfg.max_atoms + 1):
            for g in by_size[size - 1]:
                for c in conns:
                    f = And(g, atom) if c == AND else Or(g, atom)
                    fresh[size].append(f)
                    yield f
        for size in range(1, cfg.max_atoms + 1):
            by_size[size].extend(fresh[size])


# -- checking ------------------------------------------------------------------


class _Searcher:
    def __init__(self, problem: Problem, cfg: SearchConfig):
        self.problem = problem
        self.cfg = cfg
        self.budget = _Budget(cfg.budget)
        self.names = sorted(problem.sequent().symbols())
        self.cache: dict[tuple, Verdict] = {}

    def valid(self, assumptions: Sequence[Formula], goal: Formula) -> bool:
        key = (tuple(assumptions), goal)
        if key not in self.cache:
            # most candidates fail at a small integer point; skip the full oracle then
            if arith.falsify_sequent(assumptions, goal, cfg=_QUICK) is not None:
                self.cache[key] = arith.UNKNOWN
                return False
            self.cache[key] = arith.decide(list(assumptions), goal, seed=self.cfg.seed, config=self.cfg.oracle)
        return self.cache[key].is_valid

    def admissible(self, f: Formula) -> bool:
        return classify(f) <= self.cfg.opclass and sum(1 for _ in atoms(f)) <= self.cfg.max_atoms

    def domain(self, goal: Sequent) -> list[Formula]:
        h = goal.box.sys.domain
        return [] if h == TRUE else [h]

    def induction_step(self, goal: Sequent, f: Formula) -> Optional[bool]:
        """None if no induction rule closes; otherwise whether the open variant was used."""
        sys = goal.box.sys
        h = self.domain(goal)
        if self.valid(h, derive_formula(f, sys, self.cfg.strict)):
            return False
        if self.cfg.allow_open_di and is_open(f) and self.valid(h + [f], derive_formula(f, sys, self.cfg.strict)):
            return True
        return None

    def invariant(self, goal: Sequent) -> Optional[Invariant]:
        post = goal.box.post
        ante = list(goal.antecedent)
        for f in enumerate_candidates(self.names, self.cfg):
            self.budget.spend()
            if not (self.valid(ante, f) and self.valid([f], post)):
                continue
            opened = self.induction_step(goal, f)
            if opened is not None:
                return Invariant(f, open=opened)
        return None

    def aux(self, goal: Sequent) -> Optional[Aux]:
        """The pattern p > 0 via p*y^2 = 1 with y' = c*y chosen to make the step zero."""
        post = goal.box.post
        if self.cfg.da_degree < 1 or not (isinstance(post, Atom) and post.rel == GT) or post not in goal.antecedent:
            return None
        p = post.poly
        q = lie_derivative(p, goal.box.sys).exact_quotient(p)
        if q is None or not q.is_constant:
            return None
        y = _fresh("y", goal.symbols())
        theta = Polynomial.var(y).scale(-q.constant_value / 2)
        psi = Atom(p * Polynomial.var(y) ** 2 - 1, EQ)
        if not (classify(psi) <= self.cfg.opclass):
            return None
        self.budget.spend()
        return Aux(y, theta, psi, Invariant(psi))

    def closes(self, goal: Sequent, cuts_left: int) -> Optional[Script]:
        box = goal.box
        if self.valid(self.domain(goal), box.post):
            return Weaken()
        if self.admissible(box.post) and box.post in goal.antecedent:
            opened = self.induction_step(goal, box.post)
            if opened is not None:
                return Invariant(box.post, open=opened)
        found = self.aux(goal) or self.invariant(goal)
        if found is not None:
            return found
        if cuts_left == 0:
            return None
        h = self.domain(goal)
        ante = list(goal.antecedent)
        for c in enumerate_candidates(self.names, self.cfg):
            self.budget.spend()
            if self.valid(h, c) or not self.valid(ante, c):
                continue
            opened = self.induction_step(goal, c)
            if opened is not None:
                step = Invariant(c, open=opened)
                right = Sequent(goal.antecedent, (Box(box.sys.with_domain(strengthen(box.sys.domain, c)), box.post),))
                rest = self.closes(right, cuts_left - 1)
                if rest is not None:
                    return Cut(c, step, rest)
        return None


def _fresh(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    if base not in taken:
        return base
    for i in itertools.count(1):
        if f"{base}{i}" not in taken:
            return f"{base}{i}"
    raise AssertionError


def _run(problem: Problem, cfg: SearchConfig, cuts: int) -> Optional[tuple[Script, ProofNode]]:
    s = _Searcher(problem, cfg)
    try:
        script = s.closes(problem.sequent(), cuts)
    except BudgetExhausted:
        return None
    if script is None:
        return None
    tree = replay(script, problem, strict=cfg.strict)
    assert check_proof(tree, seed=cfg.seed, config=cfg.oracle).is_valid
    return script, tree


def search_script(problem: Problem, cfg: SearchConfig) -> Optional[tuple[Script, ProofNode]]:
    """Search honoring ``cfg.max_cuts``; returns the script and its tree."""
    return _run(problem, cfg, cfg.max_cuts)


def search_invariant(problem: Problem, cfg: SearchConfig) -> Optional[tuple[Formula, ProofNode]]:
    """First candidate whose variation premises all close, without cuts."""
    s = _Searcher(problem, cfg)
    try:
        found = s.invariant(problem.sequent())
    except BudgetExhausted:
        return None
    if found is None:
        return None
    tree = replay(found, problem, strict=cfg.strict)
    assert check_proof(tree, seed=cfg.seed, config=cfg.oracle).is_valid
    return found.formula, tree


def search_with_cuts(problem: Problem, cfg: SearchConfig) -> Optional[ProofNode]:
    found = _run(problem, cfg, cfg.max_cuts)
    return None if found is None else found[1]

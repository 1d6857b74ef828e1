"""Proof kernel: sequents, rule applications, and the proof-tree checker.

Every ``apply_*`` function looks only at its conclusion sequent and its
instantiation data and returns the premises the rule demands.  A
:class:`ProofNode` records a rule instance; :func:`check_proof` regenerates
each node's premises from scratch and compares them with the stored ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Iterator, Mapping, Optional, Sequence, Union

from . import arith
from .arith import UNKNOWN, OracleConfig, Verdict
from .derivation import OdeSystem, derive_formula
from .formulas import (
    EQ,
    FALSE,
    GT,
    TRUE,
    And,
    Atom,
    Formula,
    Or,
    Truth,
    is_open,
    substitute,
)
from .formulas import variables as formula_variables
from .terms import Polynomial

MAX_CUT_DEPTH = 64


class KernelError(Exception):
    """A rule does not apply to the given conclusion."""


class ShapeMismatch(KernelError):
    pass


class NotOpen(KernelError):
    pass


class NotFresh(KernelError):
    pass


class GlobalSolutionUnverified(KernelError):
    pass


class ModalMismatch(KernelError):
    pass


class MalformedTree(Exception):
    def __init__(self, msg: str, path: tuple[int, ...] = ()):
        super().__init__(f"{msg} (at node {'/'.join(map(str, path)) or 'root'})")
        self.path = path


@dataclass(frozen=True)
class Box:
    """The modal formula ``[sys]post``."""

    sys: OdeSystem
    post: Formula

    def __str__(self) -> str:
        return f"[{self.sys}] {_paren(self.post)}"


Item = Union[Formula, Box]


def _paren(f) -> str:
    return f"({f})" if isinstance(f, (And, Or)) else str(f)


@dataclass(frozen=True)
class Sequent:
    antecedent: tuple[Item, ...]
    succedent: tuple[Item, ...]

    def __init__(self, antecedent: Sequence[Item] = (), succedent: Sequence[Item] = ()):
        object.__setattr__(self, "antecedent", tuple(antecedent))
        object.__setattr__(self, "succedent", tuple(succedent))
        if sum(isinstance(s, Box) for s in self.succedent) > 1:
            raise ShapeMismatch("at most one modal formula per succedent")

    @property
    def box(self) -> Optional[Box]:
        for s in self.succedent:
            if isinstance(s, Box):
                return s
        return None

    @property
    def is_modal(self) -> bool:
        return any(isinstance(i, Box) for i in self.antecedent + self.succedent)

    def symbols(self) -> frozenset[str]:
        out: set[str] = set()
        for item in self.antecedent + self.succedent:
            if isinstance(item, Box):
                out |= item.sys.symbols | formula_variables(item.post)
            else:
                out |= formula_variables(item)
        return frozenset(out)

    def __str__(self) -> str:
        ante = ", ".join(_paren(a) if len(self.antecedent) > 1 else str(a) for a in self.antecedent)
        succ = ", ".join(str(s) for s in self.succedent)
        return f"{ante} |- {succ}".strip()


@dataclass(frozen=True)
class Problem:
    """``pre -> [sys] post``."""

    sys: OdeSystem
    pre: Formula
    post: Formula

    def sequent(self) -> Sequent:
        return Sequent((self.pre,), (Box(self.sys, self.post),))


@dataclass(frozen=True, eq=True)
class ProofNode:
    conclusion: Sequent
    rule: str
    args: Mapping[str, Any] = field(default_factory=dict)
    premises: tuple["ProofNode", ...] = ()

    def walk(self, path: tuple[int, ...] = ()) -> Iterator[tuple[tuple[int, ...], "ProofNode"]]:
        yield path, self
        for i, p in enumerate(self.premises):
            yield from p.walk(path + (i,))


# -- helpers -----------------------------------------------------------------


def _modal_goal(goal: Sequent) -> Box:
    box = goal.box
    if box is None or len(goal.succedent) != 1:
        raise ShapeMismatch(f"expected a single modal succedent in {goal}")
    return box


def _domain_items(sys: OdeSystem) -> tuple[Formula, ...]:
    return () if sys.domain == TRUE else (sys.domain,)


def strengthen(h: Formula, c: Formula) -> Formula:
    """Domain after a differential cut; a true domain is replaced outright."""
    return c if h == TRUE else And(h, c)


def _invariant_goal(goal: Sequent) -> Box:
    box = _modal_goal(goal)
    if box.post not in goal.antecedent:
        raise ShapeMismatch(f"postcondition {box.post} is not assumed in {goal}")
    return box


# -- rules -------------------------------------------------------------------


def apply_di(goal: Sequent, strict: bool = False) -> tuple[Sequent]:
    """F |- [x'=theta & H]F  ~>  H |- F' with theta substituted."""
    box = _invariant_goal(goal)
    return (Sequent(_domain_items(box.sys), (derive_formula(box.post, box.sys, strict),)),)


def apply_di_open(goal: Sequent, strict: bool = False) -> tuple[Sequent]:
    """Open induction: the invariant may be assumed in the step."""
    box = _invariant_goal(goal)
    if not is_open(box.post):
        raise NotOpen(f"{box.post} has non-strict atoms")
    return (Sequent(_domain_items(box.sys) + (box.post,), (derive_formula(box.post, box.sys, strict),)),)


def apply_dw(goal: Sequent) -> tuple[Sequent]:
    box = _modal_goal(goal)
    return (Sequent(_domain_items(box.sys), (box.post,)),)


def apply_dc(goal: Sequent, cut: Formula) -> tuple[Sequent, Sequent]:
    box = _modal_goal(goal)
    left = Sequent(goal.antecedent, (Box(box.sys, cut),))
    right = Sequent(goal.antecedent, (Box(box.sys.with_domain(strengthen(box.sys.domain, cut)), box.post),))
    return left, right


def is_affine(p: Polynomial) -> bool:
    return p.degree() <= 1


def da_pattern(phi: Formula, psi: Formula, y: str) -> bool:
    """The built-in equivalence ``p > 0 <-> exists y. p*y^2 = 1``."""
    if not (isinstance(phi, Atom) and phi.rel == GT and isinstance(psi, Atom) and psi.rel == EQ):
        return False
    target = phi.poly * Polynomial.var(y) ** 2 - 1
    return psi.poly == target or psi.poly == -target


def apply_da(
    goal: Sequent,
    y: str,
    theta: Polynomial,
    psi: Formula,
    witness: Optional[Polynomial] = None,
    assume_global: bool = False,
) -> tuple[Sequent, ...]:
    """Differential auxiliary ``y' = theta`` with replacement invariant psi.

    With a witness term w the side condition ``phi <-> exists y. psi`` becomes
    the arithmetic premises ``psi |- phi`` and ``phi |- psi[y:=w]``; without
    one, the pair must match the built-in pattern.  The last premise is the
    invariance of psi along the extended system.
    """
    box = _invariant_goal(goal)
    phi = box.post
    if y in goal.symbols():
        raise NotFresh(f"{y} occurs in {goal}")
    if witness is not None and y in witness.variables:
        raise ShapeMismatch("witness term mentions the auxiliary variable")
    if not assume_global and not is_affine(theta):
        raise GlobalSolutionUnverified(f"{y}' = {theta} is not affine")
    extended = Sequent((psi,), (Box(box.sys.extend(y, theta), psi),))
    if witness is not None:
        inst = substitute(psi, {y: witness})
        return Sequent((psi,), (phi,)), Sequent((phi,), (inst,)), extended
    if not da_pattern(phi, psi, y):
        raise ShapeMismatch("DA side condition needs a witness term or the p>0 / p*y^2=1 pattern")
    return (extended,)


def apply_variation(goal: Union[Sequent, Problem], invariant: Formula) -> tuple[Sequent, Sequent, Sequent]:
    """Gamma |- [sys]B  ~>  Gamma |- F;  F |- [sys]F;  F |- B."""
    if isinstance(goal, Problem):
        goal = goal.sequent()
    box = _modal_goal(goal)
    return (
        Sequent(goal.antecedent, (invariant,)),
        Sequent((invariant,), (Box(box.sys, invariant),)),
        Sequent((invariant,), (box.post,)),
    )


def apply_gen(goal: Sequent) -> tuple[Sequent]:
    """[sys]F |- [sys]G  ~>  F |- G."""
    if len(goal.antecedent) != 1 or not isinstance(goal.antecedent[0], Box):
        raise ShapeMismatch("generalization needs exactly one modal assumption")
    left = goal.antecedent[0]
    right = _modal_goal(goal)
    if left.sys != right.sys:
        raise ModalMismatch(f"[{left.sys}] vs [{right.sys}]")
    return (Sequent((left.post,), (right.post,)),)


def apply_cut(goal: Sequent, phi: Item) -> tuple[Sequent, Sequent]:
    return Sequent(goal.antecedent, (phi,)), Sequent(goal.antecedent + (phi,), goal.succedent)


def apply_hide(goal: Sequent, formula: Item) -> tuple[Sequent]:
    ante = list(goal.antecedent)
    if formula not in ante:
        raise ShapeMismatch(f"{formula} is not in the antecedent")
    ante.remove(formula)
    return (Sequent(ante, goal.succedent),)


def _replace(items: tuple, old, new: Sequence) -> tuple:
    i = items.index(old)
    return items[:i] + tuple(new) + items[i + 1 :]


def apply_propositional(goal: Sequent, rule: str, formula: Item) -> tuple[Sequent, ...]:
    """Sequent rules for the connectives that survive NNF ingestion."""
    if rule in ("and_l", "or_l") and formula not in goal.antecedent:
        raise ShapeMismatch(f"{formula} is not in the antecedent")
    if rule in ("and_r", "or_r") and formula not in goal.succedent:
        raise ShapeMismatch(f"{formula} is not in the succedent")
    if rule == "and_l" and isinstance(formula, And):
        return (Sequent(_replace(goal.antecedent, formula, (formula.left, formula.right)), goal.succedent),)
    if rule == "or_l" and isinstance(formula, Or):
        return tuple(Sequent(_replace(goal.antecedent, formula, (part,)), goal.succedent) for part in (formula.left, formula.right))
    if rule == "and_r" and isinstance(formula, And):
        return tuple(Sequent(goal.antecedent, _replace(goal.succedent, formula, (part,))) for part in (formula.left, formula.right))
    if rule == "or_r" and isinstance(formula, Or):
        return (Sequent(goal.antecedent, _replace(goal.succedent, formula, (formula.left, formula.right))),)
    raise ShapeMismatch(f"rule {rule} does not apply to {formula}")


def is_axiom(goal: Sequent) -> bool:
    return (
        any(s in goal.antecedent for s in goal.succedent)
        or TRUE in goal.succedent
        or FALSE in goal.antecedent
    )


def close_by_arith(goal: Sequent, seed: int = 0, config: OracleConfig = arith.DEFAULT_CONFIG) -> Verdict:
    if goal.is_modal:
        raise ShapeMismatch("arithmetic closure of a modal sequent")
    succ = goal.succedent
    target: Formula = FALSE
    for s in succ:
        target = s if target == FALSE else Or(target, s)
    return arith.decide(list(goal.antecedent), target, seed=seed, config=config)


# -- rule table --------------------------------------------------------------

_PROPOSITIONAL = ("and_l", "and_r", "or_l", "or_r")

RULES: dict[str, Callable[..., tuple[Sequent, ...]]] = {
    "di": lambda g, strict=False: apply_di(g, strict),
    "di_open": lambda g, strict=False: apply_di_open(g, strict),
    "dw": lambda g: apply_dw(g),
    "dc": lambda g, cut: apply_dc(g, cut),
    "da": lambda g, y, theta, psi, witness=None, assume_global=False: apply_da(g, y, theta, psi, witness, assume_global),
    "variation": lambda g, invariant: apply_variation(g, invariant),
    "gen": lambda g: apply_gen(g),
    "cut": lambda g, phi: apply_cut(g, phi),
    "hide": lambda g, formula: apply_hide(g, formula),
    **{name: (lambda n: lambda g, formula: apply_propositional(g, n, formula))(name) for name in _PROPOSITIONAL},
}

LEAF_RULES = ("ax", "arith")


def premises_of(conclusion: Sequent, rule: str, args: Mapping[str, Any]) -> tuple[Sequent, ...]:
    if rule in LEAF_RULES:
        return ()
    if rule not in RULES:
        raise KernelError(f"unknown rule {rule!r}")
    return RULES[rule](conclusion, **args)


def make_node(conclusion: Sequent, rule: str, premises: Sequence[ProofNode] = (), **args) -> ProofNode:
    """Build a node, checking that the premises match the rule instance."""
    expected = premises_of(conclusion, rule, args)
    got = tuple(p.conclusion for p in premises)
    if expected != got:
        raise MalformedTree(f"{rule} premises do not match")
    return ProofNode(conclusion, rule, dict(args), tuple(premises))


# -- checking ----------------------------------------------------------------


@dataclass(frozen=True)
class LeafResult:
    path: tuple[int, ...]
    node: ProofNode
    verdict: Verdict


def check_leaves(
    tree: ProofNode,
    seed: int = 0,
    config: OracleConfig = arith.DEFAULT_CONFIG,
    max_cut_depth: int = MAX_CUT_DEPTH,
) -> list[LeafResult]:
    """Revalidate every rule instance and return the verdict of each leaf."""
    results: list[LeafResult] = []
    cache: dict[Sequent, Verdict] = {}
    stack: list[tuple[ProofNode, tuple[int, ...], int]] = [(tree, (), 0)]
    while stack:
        node, path, depth = stack.pop()
        if not isinstance(node, ProofNode):
            raise MalformedTree("not a proof node", path)
        if node.rule in ("dc", "cut"):
            depth += 1
            if depth > max_cut_depth:
                raise MalformedTree(f"cut depth exceeds {max_cut_depth}", path)
        try:
            expected = premises_of(node.conclusion, node.rule, node.args)
        except (KernelError, TypeError) as exc:
            raise MalformedTree(f"{node.rule}: {exc}", path) from exc
        if tuple(p.conclusion for p in node.premises) != expected:
            raise MalformedTree(f"{node.rule} premises do not regenerate", path)
        if node.rule == "ax":
            if not is_axiom(node.conclusion):
                raise MalformedTree("ax on a non-axiom sequent", path)
            results.append(LeafResult(path, node, Verdict.valid("propositional")))
        elif node.rule == "arith":
            if node.conclusion not in cache:
                try:
                    cache[node.conclusion] = close_by_arith(node.conclusion, seed, config)
                except KernelError as exc:
                    raise MalformedTree(str(exc), path) from exc
            results.append(LeafResult(path, node, cache[node.conclusion]))
        for i in reversed(range(len(node.premises))):
            stack.append((node.premises[i], path + (i,), depth))
    results.sort(key=lambda r: r.path)
    return results


def check_proof(
    tree: ProofNode,
    seed: int = 0,
    config: OracleConfig = arith.DEFAULT_CONFIG,
    max_cut_depth: int = MAX_CUT_DEPTH,
) -> Verdict:
    """Valid iff every rule instance regenerates and every leaf closes.

    Invalid carries the witness and path of the first refuted leaf; Unknown
    means some leaf's arithmetic was undecided.
    """
    leaves = check_leaves(tree, seed, config, max_cut_depth)
    for leaf in leaves:
        if leaf.verdict.is_invalid:
            return Verdict.invalid(leaf.verdict.witness, path=leaf.path)
    if any(leaf.verdict.is_unknown for leaf in leaves):
        return UNKNOWN
    return Verdict.valid("proof")

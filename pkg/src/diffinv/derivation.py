"""Total derivatives of polynomials and formulas along a polynomial vector field."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Union

from .formulas import EQ, GEQ, GT, TRUE, And, Atom, Formula, Or, Truth
from .formulas import variables as formula_variables
from .terms import Polynomial


@dataclass(frozen=True)
class OdeSystem:
    """``x_i' = theta_i`` for each equation, restricted to the evolution domain."""

    equations: tuple[tuple[str, Polynomial], ...]
    domain: Formula = TRUE

    def __init__(
        self,
        equations: Union[Mapping[str, Polynomial], Iterable[tuple[str, Polynomial]]],
        domain: Formula = TRUE,
    ):
        items = tuple(equations.items() if isinstance(equations, Mapping) else equations)
        seen = set()
        for v, _ in items:
            if v in seen:
                raise ValueError(f"variable {v} has two differential equations")
            seen.add(v)
        object.__setattr__(self, "equations", items)
        object.__setattr__(self, "domain", domain)

    @property
    def evolving(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.equations)

    def rhs(self, var: str) -> Polynomial:
        for v, theta in self.equations:
            if v == var:
                return theta
        return Polynomial.zero()

    @property
    def symbols(self) -> frozenset[str]:
        out = set(self.evolving) | formula_variables(self.domain)
        for _, theta in self.equations:
            out |= theta.variables
        return frozenset(out)

    def with_domain(self, domain: Formula) -> "OdeSystem":
        return OdeSystem(self.equations, domain)

    def extend(self, var: str, theta: Polynomial) -> "OdeSystem":
        return OdeSystem(self.equations + ((var, theta),), self.domain)

    def __str__(self) -> str:
        eqs = ", ".join(f"{v}' = {theta}" for v, theta in self.equations)
        if self.domain == TRUE:
            return eqs
        return f"{eqs} & {self.domain}"


def lie_derivative(p: Polynomial, sys: OdeSystem) -> Polynomial:
    """Sum of dp/dx_i * theta_i over the evolving variables; other symbols are constants."""
    total = Polynomial.zero()
    for v, theta in sys.equations:
        if v in p.variables:
            total = total + p.partial(v) * theta
    return total


def derive_formula(f: Formula, sys: OdeSystem, strict: bool = False) -> Formula:
    """Differential formula with the vector field substituted.

    Equations derive to equations; ``>=`` and ``>`` both derive to ``>=``
    unless ``strict`` is set, which keeps ``>`` strict.  Both connectives
    derive to conjunctions.
    """
    if isinstance(f, Atom):
        rel = EQ if f.rel == EQ else (GT if strict and f.rel == GT else GEQ)
        return Atom(lie_derivative(f.poly, sys), rel)
    if isinstance(f, (And, Or)):
        return And(derive_formula(f.left, sys, strict), derive_formula(f.right, sys, strict))
    if isinstance(f, Truth):
        return TRUE
    raise TypeError(f"not a formula: {f!r}")

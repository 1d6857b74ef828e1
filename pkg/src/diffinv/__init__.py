"""Differential invariants for polynomial ODEs: a small proof kernel, an
exact arithmetic oracle, bounded invariant search, and numeric falsification."""

from .arith import Verdict, decide
from .derivation import OdeSystem, derive_formula, lie_derivative
from .formulas import parse, parse_term
from .kernel import Problem, ProofNode, Sequent, check_proof
from .terms import Polynomial

__all__ = [
    "OdeSystem",
    "Polynomial",
    "Problem",
    "ProofNode",
    "Sequent",
    "Verdict",
    "check_proof",
    "decide",
    "derive_formula",
    "lie_derivative",
    "parse",
    "parse_term",
]

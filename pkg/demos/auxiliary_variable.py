"""Exponential decay stays positive, proved with a ghost variable.

x > 0 under x' = -x has no polynomial invariant of the usual kind, but
adding y' = y/2 makes x*y^2 = 1 an exact conserved quantity, and that
equation forces x > 0.
"""

from fractions import Fraction

from diffinv.derivation import OdeSystem, lie_derivative
from diffinv.formulas import parse, parse_opclass, parse_term
from diffinv.kernel import Problem
from diffinv.scripts import format_script
from diffinv.search import SearchConfig, search_script

decay = OdeSystem({"x": parse_term("-x")})
problem = Problem(decay, parse("x > 0"), parse("x > 0"))

extended = OdeSystem({"x": parse_term("-x"), "y": parse_term("(1/2)*y")})
print("d/dt (x*y^2 - 1) =", lie_derivative(parse_term("x*y^2 - 1"), extended))

cfg = SearchConfig(parse_opclass("gt,eq"), da_degree=1, coefficient_pool=(Fraction(-1), Fraction(1)))
script, tree = search_script(problem, cfg)
print("found:", format_script(script))

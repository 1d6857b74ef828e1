"""Which operators an invariant may use changes what can be proved.

x >= 0 is invariant under x' = 1.  Restricted to strict inequalities and
equations, no candidate of degree <= 3 over coefficients -2..2 works; with
>= allowed the postcondition itself is an invariant.
"""

from fractions import Fraction

from diffinv.derivation import OdeSystem
from diffinv.formulas import parse, parse_opclass, parse_term
from diffinv.kernel import Problem
from diffinv.scripts import format_script
from diffinv.search import SearchConfig, search_script

drift = OdeSystem({"x": parse_term("1")})
problem = Problem(drift, parse("x >= 0"), parse("x >= 0"))
pool = tuple(Fraction(c) for c in range(-2, 3))

for cls in ("gt,eq,and,or", "geq"):
    cfg = SearchConfig(parse_opclass(cls), max_degree=3, coefficient_pool=pool, max_atoms=2, budget=3000)
    found = search_script(problem, cfg)
    print(f"{cls:>14}:", "none within bounds" if found is None else format_script(found[0]))

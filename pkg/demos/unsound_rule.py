"""Why the kernel will not accept an induction step it cannot check.

Along x' = 1, y' = y the formula -(x-y)^2 >= 0 holds initially at x = y
but the two coordinates drift apart.  A proof that just asserts the
derivative is fine gets rejected with an exact rational witness.
"""

from pathlib import Path

from diffinv.formulas import holds_at
from diffinv.kernel import check_proof
from diffinv.numsim import falsify
from diffinv.scripts import parse_problem, parse_script, replay

corpus = Path(__file__).resolve().parent.parent / "corpus"
problem = parse_problem((corpus / "diagonal.div").read_text()).problem
tree = replay(parse_script((corpus / "diagonal.prf").read_text()), problem)

verdict = check_proof(tree)
print("verdict:", verdict)
leaf = tree
for i in verdict.path:
    leaf = leaf.premises[i]
print("refuted premise:", leaf.conclusion)
print("witness satisfies the premise?", holds_at(leaf.conclusion.succedent[0], verdict.witness))

# the simulator agrees: some trajectory leaves the diagonal
cex = falsify(problem.sys, problem.pre, problem.post, samples=50, T=2.0)
print("numeric counterexample from", cex.initial, "at t =", cex.exit_time)

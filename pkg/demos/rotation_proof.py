"""Prove that a rotation never shrinks the radius.

The circle x^2 + y^2 >= p^2 is carried along by x' = y, y' = -x.
Differential induction asks only that the derivative of the invariant
holds everywhere, and here it collapses to 0 >= 0.
"""

from pathlib import Path

from diffinv.kernel import check_leaves, check_proof
from diffinv.scripts import parse_problem, parse_script, render_tree, replay

corpus = Path(__file__).resolve().parent.parent / "corpus"
problem = parse_problem((corpus / "rotation.div").read_text()).problem
script = parse_script((corpus / "rotation.prf").read_text())

tree = replay(script, problem)
leaves = {leaf.path: leaf.verdict for leaf in check_leaves(tree)}
print(render_tree(tree, leaves))
print("verdict:", check_proof(tree))

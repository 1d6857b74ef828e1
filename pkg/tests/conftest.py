from pathlib import Path

import pytest
from hypothesis import settings

from diffinv.scripts import parse_problem, parse_script

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

# (problem, script, expected check verdict)
PROOFS = [
    ("rotation", "rotation", "valid"),
    ("damped", "damped", "valid"),
    ("drift_geq", "drift_geq", "valid"),
    ("drift_gt", "drift_gt", "valid"),
    ("decay_eq", "decay_eq", "valid"),
    ("rotation_eq", "rotation_eq", "valid"),
    ("rotation_eq", "rotation_eq_weak", "valid"),
    ("quadrant", "quadrant", "valid"),
    ("cut", "cut", "valid"),
    ("cut_quartic", "cut_quartic", "valid"),
    ("decay_gt", "decay_gt", "valid"),
    ("growth_gt", "growth_gt", "valid"),
    ("interval", "interval", "valid"),
    ("interval", "interval_gen", "valid"),
    ("diagonal", "diagonal", "invalid"),
    ("growth_gt", "growth_gt_plain", "invalid"),
    ("interval", "interval_box", "invalid"),
]


def load_problem(name):
    return parse_problem((CORPUS / f"{name}.div").read_text()).problem


def load_script(name):
    return parse_script((CORPUS / f"{name}.prf").read_text())


@pytest.fixture
def corpus():
    return CORPUS

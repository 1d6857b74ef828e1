import math
from fractions import Fraction

import pytest

from diffinv.derivation import OdeSystem
from diffinv.formulas import holds_at, parse, parse_term as t
from diffinv.numsim import StepTooSmall, derivation_lemma_deviation, falsify, integrate

ROT = OdeSystem({"x": t("y"), "y": t("-x")})
DAMPED = OdeSystem({"x": t("y"), "y": t("-w^2*x - 2*d*w*y")}, parse("w >= 0 & d >= 0"))


def test_rotation_returns_home():
    traj = integrate(ROT, {"x": 1, "y": 0}, 1e-3, 2 * math.pi)
    assert all(abs(s["x"] ** 2 + s["y"] ** 2 - 1) < 1e-6 for s in traj.states)
    end = traj.states[-1]
    # the grid stops within one step of 2*pi
    assert abs(end["x"] - 1) < 1e-5 and abs(end["y"]) < 1e-3
    assert traj.times[0] == 0.0 and len(traj.times) == len(traj.states)


def test_decay_and_drift():
    traj = integrate(OdeSystem({"x": t("-x")}), {"x": 1}, 1e-3, 1)
    assert abs(traj.states[-1]["x"] - 0.36787944117144233) < 1e-6
    traj = integrate(OdeSystem({"x": t("1")}), {"x": 0}, 1e-3, 1)
    assert abs(traj.states[-1]["x"] - 1) < 1e-9


def test_overflow_stops_early():
    traj = integrate(OdeSystem({"x": t("x^2")}), {"x": 1}, 1e-3, 5)
    # x = 1/(1-t) blows up at t = 1
    assert traj.times[-1] < 1.05


def test_step_cap():
    with pytest.raises(StepTooSmall):
        integrate(ROT, {"x": 1, "y": 0}, 1e-9, 100)


def test_falsify_decreasing():
    cex = falsify(OdeSystem({"x": t("-1")}), parse("x >= 0"), parse("x >= 0"), samples=200, T=10)
    assert cex is not None
    x0 = float(cex.initial["x"])
    # x(t) = x0 - t leaves x >= 0 just after t = x0
    assert abs(cex.exit_time - x0) <= 2e-3
    assert cex.margin > 1e-6
    assert holds_at(parse("x >= 0"), cex.initial)


def test_falsify_finds_nothing_for_invariants():
    pre = parse("x^2 + y^2 >= 1")
    assert falsify(ROT, pre, pre, samples=300, T=10) is None


def test_falsify_outside_conserved_level():
    assert falsify(ROT, parse("x^2 + y^2 >= 1"), parse("x^2 + y^2 >= 2"), samples=100, T=1) is not None


def test_falsify_diagonal_claim():
    sys = OdeSystem({"x": t("1"), "y": t("y")})
    f = parse("-(x-y)^2 >= 0")
    cex = falsify(sys, f, f, samples=50, T=2)
    assert cex is not None
    assert cex.initial["x"] == cex.initial["y"]
    assert cex.exit_time < 0.1


def test_falsify_is_deterministic():
    args = (OdeSystem({"x": t("-1")}), parse("x >= 0"), parse("x >= 1/2"))
    assert falsify(*args, samples=50, T=2, seed=5) == falsify(*args, samples=50, T=2, seed=5)


def test_derivation_lemma_examples():
    assert derivation_lemma_deviation(t("x^2 + y^2"), ROT, {"x": 0.3, "y": -1.2}, 1e-3, 1) <= 1e-6
    assert derivation_lemma_deviation(t("x"), OdeSystem({"x": t("1")}), {"x": 0}, 1e-3, 1) <= 1e-9
    dev = derivation_lemma_deviation(t("w^2*x^2 + y^2"), DAMPED, {"x": 1, "y": 0, "w": 1, "d": 0.5}, 1e-3, 1)
    assert dev <= 1e-4

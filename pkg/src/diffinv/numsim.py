"""Fixed-step RK4 simulation and trajectory-based falsification.

Everything here is advisory.  A counterexample found numerically never
closes or refutes a proof; it only tells the user where to look.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from .derivation import OdeSystem, lie_derivative
from .formulas import EQ, And, Atom, Formula, Or, Truth, holds_at
from .formulas import variables as formula_variables
from .terms import Polynomial

OVERFLOW = 1e9
MAX_STEPS = 10**7
DOMAIN_TOL = 1e-6
MARGIN = 1e-6


class StepTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class Trajectory:
    times: list[float]
    states: list[dict[str, float]]


@dataclass(frozen=True)
class Counterexample:
    initial: dict[str, Fraction]
    exit_time: float
    exit_state: dict[str, float]
    margin: float


class _Compiled:
    """A polynomial compiled to vectorized numpy evaluation over named columns."""

    def __init__(self, p: Polynomial, names: Sequence[str]):
        index = {v: i for i, v in enumerate(names)}
        self.terms = [
            (float(c), [(index[v], e) for v, e in m])
            for m, c in p
        ]

    def __call__(self, X: np.ndarray) -> np.ndarray:
        out = np.zeros(X.shape[0])
        for c, factors in self.terms:
            t = np.full(X.shape[0], c)
            for i, e in factors:
                t = t * X[:, i] ** e
            out = out + t
        return out


def _names(sys: OdeSystem, *extra: Formula) -> list[str]:
    names = set(sys.symbols)
    for f in extra:
        names |= formula_variables(f)
    return sorted(names)


def _vector_field(sys: OdeSystem, names: Sequence[str]):
    rows = [(names.index(v), _Compiled(theta, names)) for v, theta in sys.equations]

    def f(X: np.ndarray) -> np.ndarray:
        D = np.zeros_like(X)
        for i, c in rows:
            D[:, i] = c(X)
        return D

    return f


def _rk4_step(f, X: np.ndarray, h: float) -> np.ndarray:
    k1 = f(X)
    k2 = f(X + 0.5 * h * k1)
    k3 = f(X + 0.5 * h * k2)
    k4 = f(X + h * k3)
    return X + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _steps(h: float, T: float) -> int:
    if h <= 0 or T < 0:
        raise ValueError("need h > 0 and T >= 0")
    n = int(round(T / h))
    if n > MAX_STEPS:
        raise StepTooSmall(f"{n} steps exceed the cap of {MAX_STEPS}")
    return n


def integrate(sys: OdeSystem, init: Mapping[str, float], h: float, T: float) -> Trajectory:
    names = sorted(set(sys.symbols) | set(init))
    missing = set(sys.symbols) - set(init)
    if missing:
        raise KeyError(f"no initial value for {sorted(missing)}")
    f = _vector_field(sys, names)
    X = np.array([[float(init[v]) for v in names]])
    times, states = [0.0], [dict(zip(names, X[0].tolist()))]
    for k in range(1, _steps(h, T) + 1):
        X = _rk4_step(f, X, h)
        if not np.all(np.isfinite(X)) or np.max(np.abs(X)) > OVERFLOW:
            break
        times.append(k * h)
        states.append(dict(zip(names, X[0].tolist())))
    return Trajectory(times, states)


def _robustness(f: Formula, names: Sequence[str]):
    """Signed slack: positive inside, negative outside, vectorized."""
    if isinstance(f, Atom):
        c = _Compiled(f.poly, names)
        if f.rel == EQ:
            return lambda X: -np.abs(c(X))
        return c
    if isinstance(f, (And, Or)):
        left, right = _robustness(f.left, names), _robustness(f.right, names)
        op = np.minimum if isinstance(f, And) else np.maximum
        return lambda X: op(left(X), right(X))
    value = np.inf if f.value else -np.inf
    return lambda X: np.full(X.shape[0], value)


def _violated(f: Formula, names: Sequence[str]):
    rob = _robustness(f, names)

    def check(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        r = rob(X)
        return r < -MARGIN, -r

    return check


def _sample_points(names, box, pre, samples, seed, max_tries) -> list[dict[str, Fraction]]:
    rng = random.Random(seed)
    lo, hi = box
    points: list[dict[str, Fraction]] = []
    tries = 0
    while len(points) < samples and tries < max_tries:
        tries += 1
        point = {}
        for v in names:
            d = rng.randint(1, 4)
            n = rng.randint(int(np.ceil(lo * d)), int(np.floor(hi * d)))
            point[v] = Fraction(n, d)
        if holds_at(pre, point):
            points.append(point)
    return points


def falsify(
    sys: OdeSystem,
    pre: Formula,
    post: Formula,
    samples: int = 1000,
    box: tuple[float, float] = (-5.0, 5.0),
    h: float = 1e-3,
    T: float = 10.0,
    seed: int = 0,
    max_tries: Optional[int] = None,
) -> Optional[Counterexample]:
    """Search sampled trajectories for one that leaves post while staying in the domain.

    Samples are rational points in ``box`` satisfying ``pre`` exactly; all
    samples are integrated together and the lowest-index violation wins.
    """
    names = _names(sys, pre, post)
    points = _sample_points(names, box, pre, samples, seed, max_tries or 100 * samples)
    if not points:
        return None
    field = _vector_field(sys, names)
    domain = _robustness(sys.domain, names)
    post_bad = _violated(post, names)
    X = np.array([[float(p[v]) for v in names] for p in points])
    alive = np.ones(len(points), dtype=bool)
    hit_time = np.full(len(points), -1.0)
    hit_state = np.zeros_like(X)
    hit_margin = np.zeros(len(points))
    for k in range(_steps(h, T) + 1):
        # rows already stopped may overflow; they are masked out below
        with np.errstate(invalid="ignore", over="ignore"):
            if k:
                X = np.where(alive[:, None], _rk4_step(field, X, h), X)
            alive &= np.all(np.isfinite(X), axis=1) & (np.max(np.abs(X), axis=1) <= OVERFLOW)
            alive &= domain(X) >= -DOMAIN_TOL
            bad, margin = post_bad(X)
        new = alive & bad
        hit_time[new] = k * h
        hit_state[new] = X[new]
        hit_margin[new] = margin[new]
        alive &= ~new
        hits = np.nonzero(hit_time >= 0)[0]
        # the lowest-index hit is final once nothing before it is still running
        if hits.size and not alive[: hits[0]].any():
            break
        if not alive.any():
            break
    hits = np.nonzero(hit_time >= 0)[0]
    if not hits.size:
        return None
    i = int(hits[0])
    assert holds_at(pre, points[i])
    return Counterexample(
        initial=points[i],
        exit_time=float(hit_time[i]),
        exit_state=dict(zip(names, hit_state[i].tolist())),
        margin=float(hit_margin[i]),
    )


def derivation_lemma_deviation(
    c: Polynomial, sys: OdeSystem, init: Mapping[str, float], h: float, T: float
) -> float:
    """Largest gap between a centered difference of c along the flow and its Lie derivative."""
    traj = integrate(sys, init, h, T)
    names = sorted(traj.states[0])
    X = np.array([[s[v] for v in names] for s in traj.states])
    values = _Compiled(c, names)(X)
    lie = _Compiled(lie_derivative(c, sys), names)(X)
    if len(values) < 3:
        return 0.0
    fd = (values[2:] - values[:-2]) / (2 * h)
    return float(np.max(np.abs(fd - lie[1:-1])))

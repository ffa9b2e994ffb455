"""
Problem data for distributed robust convex programs.

Each agent ``i`` owns a convex cost ``f_i(x)`` and a robust constraint
``g_i(x, y) <= 0`` that must hold for every ``y`` in a scalar interval.
All agents share the box ``X``. Functions are plain callbacks: the solvers
only ever ask for values, gradients and (when available) Hessians.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class ConvexFunction:
    """A convex function given by value/gradient callbacks.

    ``hess`` is optional; the projection code falls back to finite
    differences of ``grad`` when it is missing.
    """

    fun: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x):
        return float(self.fun(np.asarray(x, dtype=float)))

    def subgradient(self, x):
        return np.asarray(self.grad(np.asarray(x, dtype=float)), dtype=float)

    def hessian(self, x, h=1e-6):
        x = np.asarray(x, dtype=float)
        if self.hess is not None:
            return np.asarray(self.hess(x), dtype=float)
        d = x.size
        H = np.empty((d, d))
        for k in range(d):
            e = np.zeros(d)
            e[k] = h
            H[:, k] = (self.subgradient(x + e) - self.subgradient(x - e)) / (2 * h)
        return 0.5 * (H + H.T)


@dataclass(frozen=True)
class RobustConstraint:
    """Constraint ``g(x, y) <= 0`` for all ``y`` in ``[y_lo, y_hi]``.

    ``fun(x, y)`` must broadcast over an array of ``y`` values; the LLP
    oracle evaluates whole grids at once. ``lipschitz_y`` (a bound on
    ``|dg/dy|`` over the box) lets the oracle certify its grid gap.
    """

    fun: Callable
    grad_x: Callable
    y_lo: float
    y_hi: float
    hess_x: Optional[Callable] = None
    lipschitz_y: Optional[float] = None

    def __post_init__(self):
        if not self.y_lo <= self.y_hi:
            raise ValueError(f"empty uncertainty interval [{self.y_lo}, {self.y_hi}]")

    def __call__(self, x, y):
        return self.fun(np.asarray(x, dtype=float), y)

    def at(self, y, shift=0.0):
        """The convex function ``x -> g(x, y) + shift`` for a fixed ``y``."""
        y = float(y)
        hess = None
        if self.hess_x is not None:
            hess = lambda x: self.hess_x(x, y)
        return ConvexFunction(lambda x: self.fun(x, y) + shift,
                              lambda x: self.grad_x(x, y), hess)


@dataclass(frozen=True)
class BoxSet:
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float)
        hi = np.asarray(self.upper, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError("box bounds must be 1-D arrays of equal length")
        if np.any(lo > hi):
            raise ValueError("box is empty (lower > upper)")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self):
        return self.lower.size

    @property
    def center(self):
        return 0.5 * (self.lower + self.upper)

    def contains(self, x, tol=0.0):
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def sample(self, rng, size):
        return rng.uniform(self.lower, self.upper, size=(size, self.dim))


@dataclass(frozen=True)
class ProblemInstance:
    costs: Sequence[ConvexFunction]
    constraints: Sequence[RobustConstraint]
    box: BoxSet
    name: str = "custom"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if len(self.costs) != len(self.constraints):
            raise ValueError("need one cost and one constraint per agent")
        object.__setattr__(self, "costs", tuple(self.costs))
        object.__setattr__(self, "constraints", tuple(self.constraints))

    @property
    def m(self):
        return len(self.costs)

    @property
    def n(self):
        return self.box.dim


def evaluate_global_objective(inst, x):
    """F(x) = sum of the agents' local costs."""
    return float(sum(f(x) for f in inst.costs))


def _sq_dist_cost(q):
    q = np.array(q, dtype=float)
    q.setflags(write=False)
    eye2 = 2.0 * np.eye(q.size)

    def fun(x):
        d = x - q
        return float(d @ d)

    return ConvexFunction(fun,
                          lambda x: 2.0 * (x - q),
                          lambda x: eye2)


# Table of the six-agent example: cost centres q_i and constraint offsets p_i.
SECTION5_Q = ((0.0, 6.0), (0.0, 0.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0))
SECTION5_P = (-0.75, -0.5, -0.25, 0.25, 0.5, 0.75)


def _disc_constraint(p):
    # g(x, y) = (x1 - p)^2 + 2 y x2 - y^2 - 1, y in [-1, 1]
    def fun(x, y):
        return (x[0] - p) ** 2 + 2.0 * y * x[1] - y * y - 1.0

    def grad_x(x, y):
        return np.array([2.0 * (x[0] - p), 2.0 * y])

    def hess_x(x, y):
        return np.array([[2.0, 0.0], [0.0, 0.0]])

    # |dg/dy| = |2 x2 - 2 y| <= 4 on the box
    return RobustConstraint(fun, grad_x, -1.0, 1.0, hess_x=hess_x, lipschitz_y=4.0)


def build_section5_instance():
    """Six agents, quadratic costs, disc-shaped robust constraints.

    The robust feasible set of agent ``i`` is the unit disc centred at
    ``(p_i, 0)``; the optimum of the full problem is ``(0, sqrt(7)/4)``.
    """
    costs = [_sq_dist_cost(q) for q in SECTION5_Q]
    constraints = [_disc_constraint(p) for p in SECTION5_P]
    box = BoxSet(np.array([-2.0, -1.0]), np.array([2.0, 1.0]))
    return ProblemInstance(costs, constraints, box, name="section5",
                           meta={"q": SECTION5_Q, "p": SECTION5_P})


def build_nonconvex_llp_instance():
    """Single agent: minimise ``-x2`` under a constraint nonconvex in ``y``.

    ``g(x, y) = x2 + (x1^2 - 2 x1) exp(-x1^2 + y^2 - 2 x1 y)`` on
    ``X = [0, 2] x [0, 1]``, ``y in [0, 2]``.
    """
    def fun(x, y):
        return x[1] + (x[0] ** 2 - 2.0 * x[0]) * np.exp(-x[0] ** 2 + y * y - 2.0 * x[0] * y)

    def grad_x(x, y):
        a = x[0]
        e = np.exp(-a * a + y * y - 2.0 * a * y)
        return np.array([(2.0 * a - 2.0) * e + (a * a - 2.0 * a) * e * (-2.0 * a - 2.0 * y), 1.0])

    cost = ConvexFunction(lambda x: -float(x[1]),
                          lambda x: np.array([0.0, -1.0]),
                          lambda x: np.zeros((2, 2)))
    g = RobustConstraint(fun, grad_x, 0.0, 2.0)
    box = BoxSet(np.array([0.0, 0.0]), np.array([2.0, 1.0]))
    return ProblemInstance([cost], [g], box, name="fig9")


INSTANCES = {
    "section5": build_section5_instance,
    "fig9": build_nonconvex_llp_instance,
}


def get_instance(name):
    try:
        return INSTANCES[name]()
    except KeyError:
        raise KeyError(f"unknown instance {name!r}; choose from {sorted(INSTANCES)}") from None

"""Centralised reference solver for a restricted, discretised problem."""

import numpy as np

from ..projection import Box, InteriorPoint, Projector, Sublevel, feasibility_probe
from ..problem import evaluate_global_objective


class Infeasible(RuntimeError):
    pass


def restricted_sets(inst, eps, cuts):
    """Box plus every sampled constraint ``g_i(x, y) <= -eps_i``, in ``x`` only."""
    eps = np.broadcast_to(np.asarray(eps, dtype=float), (inst.m,))
    sets = [Box(inst.box)]
    for i, g in enumerate(inst.constraints):
        for y in cuts[i]:
            sets.append(Sublevel(g.at(y), -eps[i]))
    return sets


def centralized_oracle(inst, eps, cuts, tol=1e-10, max_iter=200000):
    """Projected gradient on ``F = sum f_i`` over the intersection of all local sets.

    Steps are ``1/L`` with ``L`` found by backtracking; stops once
    ``||x_{k+1} - x_k|| < tol``.

    Raises
    ------
    Infeasible
        When the intersection looks empty.
    """
    sets = restricted_sets(inst, eps, cuts)
    if len(sets) > 1 and not isinstance(feasibility_probe(sets, strict_margin=0.0, max_iter=5000),
                                        InteriorPoint):
        raise Infeasible("restricted feasible set appears empty")
    proj = Projector(sets, tol=1e-12)

    def F(x):
        return evaluate_global_objective(inst, x)

    def grad(x):
        return sum(f.subgradient(x) for f in inst.costs)

    x = proj(inst.box.center).point
    L = 1.0
    for _ in range(max_iter):
        g = grad(x)
        fx = F(x)
        while True:
            x_new = proj(x - g / L).point
            d = x_new - x
            if F(x_new) <= fx + g @ d + 0.5 * L * (d @ d) + 1e-15 * abs(fx):
                break
            L *= 2.0
        if np.linalg.norm(d) < tol:
            return x_new
        x = x_new
        L = max(L / 1.5, 1e-8)
    return x

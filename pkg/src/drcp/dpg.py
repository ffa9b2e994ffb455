"""
Distributed projected gradient (DPG) for the restricted, discretised problem.

Each agent keeps a lifted state ``theta_i = (x, u)`` with one epigraph
variable per agent. All agents minimise the same linear objective
``c @ theta = sum(u) / m`` over their own local set

    Omega_i = {(x, u) in X x U : f_i(x) <= u_i, g_i(x, y) <= -eps_i for y in Y_i}

and iterate ``theta_i <- P_Omega_i(sum_j a_ij theta_j - alpha(t) c)``. A
four-counter protocol detects, in finite time and with purely local
messages, when consensus and both zeroth-order stopping conditions hold
across the whole network.
"""

import enum
import logging
import time
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .network import is_ujsc, union_diameter
from .problem import BoxSet, ConvexFunction
from .projection import (Box, InteriorPoint, Intersection, Projector, Sublevel,
                         feasibility_probe)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class DpgTolerances:
    eps1: float = 1e-2  # consensus
    eps2: float = 1e-6  # successive-state displacement
    eps3: float = 1e-6  # successive local-cost change


def cost_direction(n, m):
    """Gradient of the shared objective ``sum(u)/m`` in the lifted space."""
    return np.concatenate([np.zeros(n), np.full(m, 1.0 / m)])


def u_bounds(inst, samples=1000, pad=10.0, seed=0):
    """Compact range for the epigraph variables.

    Per agent: min/max of ``f_i`` over box samples (plus corners and the
    centre), widened by ``pad``. Wide enough never to bind at the optimum.
    """
    rng = np.random.default_rng(seed)
    box = inst.box
    pts = [box.center] + list(box.sample(rng, samples))
    n = box.dim
    if n <= 10:
        for k in range(2 ** n):
            pts.append(np.where([(k >> b) & 1 for b in range(n)], box.upper, box.lower))
    lo = np.empty(inst.m)
    hi = np.empty(inst.m)
    for i, f in enumerate(inst.costs):
        vals = np.array([f(p) for p in pts])
        lo[i] = vals.min() - pad
        hi[i] = vals.max() + pad
    return lo, hi


class LocalSet:
    """Agent ``i``'s lifted feasible set Omega_i.

    Only ``x`` and ``u_i`` enter nonlinear constraints; the other epigraph
    variables are merely boxed. Projection therefore splits into a clip on
    those coordinates and a small exact projection on ``(x, u_i)``.
    """

    def __init__(self, i, n, m, box, u_lo, u_hi, cost, constraint, eps, cuts, tol=1e-10):
        self.i, self.n, self.m = i, n, m
        self.eps = float(eps)
        self.cuts = tuple(float(y) for y in cuts)
        self.lower = np.concatenate([box.lower, u_lo])
        self.upper = np.concatenate([box.upper, u_hi])
        self.coords = np.r_[np.arange(n), n + i]
        self.cost = cost
        self.constraint = constraint

        red_box = BoxSet(np.r_[box.lower, u_lo[i]], np.r_[box.upper, u_hi[i]])
        self.reduced = [Box(red_box), Sublevel(_lift_epigraph(cost, n))]
        for y in self.cuts:
            self.reduced.append(Sublevel(_lift_cut(constraint, y, n), -self.eps))
        self.tol = tol
        self._proj = Projector(self.reduced, tol=tol)

    def descriptor(self):
        """The same set in the full lifted space ``R^(n+m)``."""
        n, m, i = self.n, self.m, self.i
        e = np.zeros(m)
        e[i] = 1.0
        cost = self.cost

        def fun(th):
            return cost(th[:n]) - th[n + i]

        def grad(th):
            return np.concatenate([cost.subgradient(th[:n]), -e])

        def hess(th):
            H = np.zeros((n + m, n + m))
            H[:n, :n] = cost.hessian(th[:n])
            return H

        sets = [Box(BoxSet(self.lower, self.upper)), Sublevel(ConvexFunction(fun, grad, hess))]
        for y in self.cuts:
            g = self.constraint

            def gfun(th, y=y):
                return g(th[:n], y)

            def ggrad(th, y=y):
                return np.concatenate([g.grad_x(th[:n], y), np.zeros(m)])

            sets.append(Sublevel(ConvexFunction(gfun, ggrad), -self.eps))
        return Intersection(tuple(sets))

    def reduce(self, theta):
        return np.asarray(theta, dtype=float)[self.coords]

    def project(self, theta):
        out = np.clip(theta, self.lower, self.upper)
        res = self._proj(theta[self.coords])
        out[self.coords] = res.point
        return out

    def violation(self, theta):
        v = max(float(np.max(self.lower - theta, initial=0.0)),
                float(np.max(theta - self.upper, initial=0.0)))
        return max(v, self._proj.violation(theta[self.coords]))

    def probe(self, strict_margin=1e-8):
        return feasibility_probe(self.reduced, strict_margin=strict_margin)

    def relaxed(self, slack):
        """Copy with every cut level raised by ``slack`` (keeps the set nonempty)."""
        clone = object.__new__(LocalSet)
        clone.__dict__.update(self.__dict__)
        clone.eps = self.eps - slack
        clone.reduced = list(self.reduced[:2]) + [
            Sublevel(s.h, s.level + slack) for s in self.reduced[2:]]
        clone._proj = Projector(clone.reduced, tol=self.tol)
        return clone


def _lift_epigraph(cost, n):
    # z = (x, u_i): f_i(x) - u_i
    def fun(z):
        return cost(z[:n]) - z[n]

    def grad(z):
        return np.append(cost.subgradient(z[:n]), -1.0)

    def hess(z):
        H = np.zeros((n + 1, n + 1))
        H[:n, :n] = cost.hessian(z[:n])
        return H

    return ConvexFunction(fun, grad, hess)


def _lift_cut(g, y, n):
    def fun(z):
        return g(z[:n], y)

    def grad(z):
        return np.append(g.grad_x(z[:n], y), 0.0)

    if g.hess_x is not None:
        def hess(z):
            H = np.zeros((n + 1, n + 1))
            H[:n, :n] = g.hess_x(z[:n], y)
            return H
    else:
        fx = g.at(y)

        def hess(z):
            H = np.zeros((n + 1, n + 1))
            H[:n, :n] = fx.hessian(z[:n])
            return H

    return ConvexFunction(fun, grad, hess)


@dataclass
class EpigraphProblem:
    local_sets: List[LocalSet]
    c: np.ndarray
    u_lo: np.ndarray
    u_hi: np.ndarray


def build_epigraph_problem(inst, eps, cuts, ubox=None, tol=1e-10):
    """Lift the restricted problem into the shared-linear-objective form.

    Parameters
    ----------
    inst : ProblemInstance
    eps : sequence of float
        Restriction parameter per agent (all > 0).
    cuts : sequence of sequences
        Finite uncertainty samples per agent (possibly empty).
    ubox : tuple of arrays, optional
        Epigraph-variable bounds; computed with :func:`u_bounds` if omitted.
    """
    m, n = inst.m, inst.n
    eps = np.broadcast_to(np.asarray(eps, dtype=float), (m,))
    if np.any(eps <= 0):
        raise ValueError("restriction parameters must be positive")
    if len(cuts) != m:
        raise ValueError("need one cut list per agent")
    u_lo, u_hi = ubox if ubox is not None else u_bounds(inst)
    sets = [LocalSet(i, n, m, inst.box, u_lo, u_hi, inst.costs[i], inst.constraints[i],
                     eps[i], cuts[i], tol=tol) for i in range(m)]
    return EpigraphProblem(sets, cost_direction(n, m), u_lo, u_hi)


def stepsize(t, alpha0=1.0):
    """``alpha(t) = alpha0 / sqrt(t + 1)``: nonincreasing, square-summable, not summable."""
    if t < 0:
        raise ValueError("slot index must be nonnegative")
    return alpha0 / np.sqrt(t + 1.0)


def dpg_step(neighbor_states, weights, alpha, c, local_set):
    """One agent update: mix, step along ``-c``, project onto the local set.

    ``neighbor_states`` is the full ``(m, n+m)`` state array (or the rows of
    the in-neighbours, matching ``weights``).
    """
    v = np.asarray(weights) @ np.asarray(neighbor_states) - alpha * c
    if hasattr(local_set, "project"):
        return local_set.project(v)
    return Projector([local_set])(v).point


class Counters:
    """Consecutive-success counters ``h`` and ``e[0..2]`` for every agent."""

    def __init__(self, m):
        self.h = np.zeros(m, dtype=np.int64)
        self.e = np.zeros((3, m), dtype=np.int64)

    def copy(self):
        c = Counters(self.h.size)
        c.h[:] = self.h
        c.e[:] = self.e
        return c


def advance_counters(counters, adjacency, ok):
    """One slot of the counter recurrences, for all agents at once.

    Parameters
    ----------
    counters : Counters
        Values at slot ``t``.
    adjacency : (m, m) bool array
        ``adjacency[i, j]`` true iff ``j`` is in agent ``i``'s closed
        in-neighbourhood at slot ``t``.
    ok : (3, m) bool array
        ``ok[k, i]`` true iff condition ``k`` holds for every ``j`` in that
        neighbourhood.

    Returns
    -------
    Counters
        Values at slot ``t + 1``.
    """
    quartet = np.minimum(counters.h, counters.e.min(axis=0))
    big = np.iinfo(np.int64).max
    nxt = Counters(counters.h.size)
    nxt.h = np.where(adjacency, quartet[None, :], big).min(axis=1) + 1
    nxt.e = np.where(ok, counters.e + 1, 0)
    return nxt


def neighborhood_all(adjacency, flags):
    """``out[i]`` true iff ``flags[j]`` holds for every ``j`` adjacent to ``i``."""
    return ~np.any(adjacency & ~np.asarray(flags, dtype=bool)[None, :], axis=1)


def pairwise_ok(adjacency, points, tol):
    """``out[i]`` true iff ``||p_i - p_j|| <= tol`` for every neighbour ``j``."""
    d = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
    return ~np.any(adjacency & (d > tol), axis=1)


def dpg_conditions(adjacency, theta, theta_prev, fvals, fvals_prev, tol):
    """Per-agent neighbourhood truth values of the three DPG stopping conditions."""
    ok1 = pairwise_ok(adjacency, theta, tol.eps1)
    if theta_prev is None:
        # no state at slot -1: the zeroth-order conditions cannot hold yet
        false = np.zeros(theta.shape[0], dtype=bool)
        return np.vstack([ok1, false, false])
    loc2 = np.linalg.norm(theta - theta_prev, axis=1) <= tol.eps2
    loc3 = np.abs(fvals - fvals_prev) <= tol.eps3
    return np.vstack([ok1, neighborhood_all(adjacency, loc2), neighborhood_all(adjacency, loc3)])


def update_dpg_counters(counters, adjacency, theta, theta_prev, fvals, fvals_prev, tol):
    ok = dpg_conditions(adjacency, theta, theta_prev, fvals, fvals_prev, tol)
    return advance_counters(counters, adjacency, ok)


def stop_threshold(S, D):
    return S * D + 1


def dpg_global_stop(counters, S, D):
    """True once some agent's ``h`` counter reaches ``S*D + 1``."""
    h = counters.h if isinstance(counters, Counters) else np.asarray(counters)
    return bool(np.any(h >= stop_threshold(S, D)))


def network_criterion(theta, theta_prev, fvals, fvals_prev, tol):
    """Brute-force check of all three stopping conditions over every agent pair."""
    d = np.linalg.norm(theta[:, None, :] - theta[None, :, :], axis=2)
    if np.max(d) > tol.eps1:
        return False
    if theta_prev is None:
        return False
    return bool(np.all(np.linalg.norm(theta - theta_prev, axis=1) <= tol.eps2)
                and np.all(np.abs(fvals - fvals_prev) <= tol.eps3))


class AveragedIterate:
    """Running ``sum(alpha(r) theta(r)) / sum(alpha(r))`` with O(1) memory."""

    def __init__(self):
        self.weighted = None
        self.total = 0.0

    def update(self, theta, alpha):
        theta = np.asarray(theta, dtype=float)
        if self.weighted is None:
            self.weighted = alpha * theta
        else:
            self.weighted = self.weighted + alpha * theta
        self.total += alpha
        return self.value

    @property
    def value(self):
        return self.weighted / self.total


def averaged_iterate(history, alphas):
    """Batch form of :class:`AveragedIterate` over a stored trajectory."""
    avg = AveragedIterate()
    for th, a in zip(history, alphas):
        avg.update(th, a)
    return avg.value


class DpgStatus(enum.Enum):
    SOLVED = "solved"
    LOCAL_SET_EMPTY = "local_set_empty"
    SLOT_CAP_REACHED = "slot_cap_reached"


@dataclass
class DpgOutcome:
    status: DpgStatus
    theta: Optional[np.ndarray] = None
    slots: int = 0
    empty_agents: tuple = ()
    stop_counters: Optional[Counters] = None
    criterion_first_slot: Optional[int] = None
    theta_avg: Optional[np.ndarray] = None
    wall_time: float = 0.0

    @property
    def solved(self):
        return self.status is DpgStatus.SOLVED

    def x(self, n):
        return None if self.theta is None else self.theta[:, :n]


def initial_state(inst, problem):
    """Every agent starts at the box centre with ``u_j = f_j(centre)``."""
    x0 = inst.box.center
    u0 = np.clip([f(x0) for f in inst.costs], problem.u_lo, problem.u_hi)
    th = np.concatenate([x0, u0])
    return np.tile(th, (inst.m, 1))


def run_dpg(inst, eps, cuts, sched, tol=None, alpha0=1.0, T_cap=100000, D=None,
            problem=None, empty_local="probe", strict_margin=1e-8, relax_margin=1e-3,
            callback=None, trace=None, trace_every=1, record_criterion=False,
            deadline=None):
    """Solve one restricted problem with DPG and finite-time termination.

    Parameters
    ----------
    inst : ProblemInstance
    eps, cuts :
        Per-agent restriction parameters and finite uncertainty samples.
    sched : GraphSchedule
        Must be UJSC with window ``sched.S``.
    tol : DpgTolerances
    alpha0 : float
        Step-size scale, ``alpha(t) = alpha0 / sqrt(t + 1)``.
    T_cap : int
        Slot budget; reaching it means the problem is declared unsolvable.
    D : int, optional
        Diameter bound for the stopping threshold; defaults to the exact
        union-graph diameter. Pass ``inst.m - 1`` when it is unknown.
    empty_local : {"probe", "relax"}
        ``"probe"`` reports ``LOCAL_SET_EMPTY`` as soon as some agent's
        local set is found empty. ``"relax"`` instead raises the offending
        cut levels just enough to make the set nonempty and keeps
        iterating, so only the slot cap can stop the run.
    callback : callable, optional
        ``callback(t, theta, theta_avg)`` after every slot.
    trace : csv.writer, optional
        Receives per-slot rows (see :func:`trace_header`).
    record_criterion : bool
        Track the first slot where the three conditions held network-wide.
    deadline : float, optional
        ``time.monotonic()`` value after which the run stops as if capped.
    """
    tol = tol or DpgTolerances()
    t0 = time.monotonic()
    m, n = inst.m, inst.n
    if not is_ujsc(sched):
        raise ValueError("communication schedule is not UJSC for its window S")
    S = sched.S
    D = union_diameter(sched) if D is None else int(D)
    threshold = stop_threshold(S, D)

    if problem is None:
        problem = build_epigraph_problem(inst, eps, cuts)
    sets = list(problem.local_sets)

    empty = []
    for i, ls in enumerate(sets):
        if not ls.cuts:
            continue
        verdict = ls.probe(strict_margin)
        if isinstance(verdict, InteriorPoint):
            continue
        empty.append(i)
        if empty_local == "relax":
            slack = verdict.violation + relax_margin * max(1.0, abs(verdict.violation))
            sets[i] = ls.relaxed(slack)
            log.info("agent %d: local set empty, cut levels relaxed by %.3g", i, slack)
    if empty and empty_local == "probe":
        return DpgOutcome(DpgStatus.LOCAL_SET_EMPTY, empty_agents=tuple(empty),
                          wall_time=time.monotonic() - t0)

    c = problem.c
    theta = initial_state(inst, problem)
    theta_prev = None
    fvals = np.array([inst.costs[i](theta[i, :n]) for i in range(m)])
    fvals_prev = None
    counters = Counters(m)
    avg = AveragedIterate()
    avg.update(theta, stepsize(0, alpha0))
    first_ok = None

    for t in range(T_cap):
        A = sched._mats[t % sched.period]
        adj = sched.adjacency(t)
        alpha = stepsize(t, alpha0)
        mixed = A @ theta - alpha * c
        new = np.empty_like(theta)
        for i in range(m):
            new[i] = sets[i].project(mixed[i])
        new_f = np.array([inst.costs[i](new[i, :n]) for i in range(m)])

        # counters for slot t+1 from the slot-t exchange
        counters = update_dpg_counters(counters, adj, theta, theta_prev, fvals, fvals_prev, tol)
        if record_criterion and first_ok is None and network_criterion(
                theta, theta_prev, fvals, fvals_prev, tol):
            first_ok = t

        if trace is not None and t % trace_every == 0:
            write_trace(trace, t, theta, n, counters)

        if np.any(counters.h >= threshold):
            log.debug("DPG stopped at slot %d", t)
            return DpgOutcome(DpgStatus.SOLVED, theta=theta.copy(), slots=t,
                              empty_agents=tuple(empty), stop_counters=counters,
                              criterion_first_slot=first_ok, theta_avg=avg.value.copy(),
                              wall_time=time.monotonic() - t0)

        theta_prev, theta = theta, new
        fvals_prev, fvals = fvals, new_f
        avg.update(theta, stepsize(t + 1, alpha0))
        if callback is not None:
            callback(t + 1, theta, avg.value)
        if deadline is not None and time.monotonic() > deadline:
            break

    return DpgOutcome(DpgStatus.SLOT_CAP_REACHED, theta=theta.copy(), slots=t + 1,
                      empty_agents=tuple(empty), stop_counters=counters,
                      criterion_first_slot=first_ok, theta_avg=avg.value.copy(),
                      wall_time=time.monotonic() - t0)


def trace_header(n):
    return (["slot", "agent"] + [f"x{k}" for k in range(n)]
            + ["dev_from_mean", "h1", "e1", "e2", "e3"])


def write_trace(writer, t, theta, n, counters):
    mean = theta.mean(axis=0)
    dev = np.linalg.norm(theta - mean, axis=1)
    for i in range(theta.shape[0]):
        writer.writerow([t, i] + [repr(float(v)) for v in theta[i, :n]]
                        + [repr(float(dev[i])), int(counters.h[i])]
                        + [int(v) for v in counters.e[:, i]])

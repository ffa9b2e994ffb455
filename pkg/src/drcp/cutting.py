"""
Outer cutting-surface loop around the DPG solver.

Every outer iteration solves a restricted, finitely discretised problem
with DPG and then tightens or relaxes it per agent:

* solvability cut: DPG could not solve it, so every ``eps_i`` shrinks by ``r``;
* feasibility cut: agent ``i``'s point violates its robust constraint, so
  the worst-case ``y`` joins that agent's sample set;
* optimality cut: agent ``i``'s point is robustly feasible, so it becomes
  the agent's candidate and ``eps_i`` shrinks by ``r``.

A second counter protocol, run over the static candidates, decides when
the candidates agree and have stopped moving.
"""

import enum
import logging
import math
import time
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .dpg import (Counters, DpgTolerances, advance_counters,
                  neighborhood_all, pairwise_ok, run_dpg, stop_threshold)
from .llp import LocallyFeasible, feasibility_verdict, solve_llp
from .network import union_diameter
from .problem import evaluate_global_objective

log = logging.getLogger(__name__)


class RunAborted(RuntimeError):
    """Outer loop stopped without terminating; ``report`` holds the partial run."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class IterationCapExceeded(RunAborted):
    pass


class TimeBudgetExceeded(RunAborted):
    pass


class CutKind(enum.Enum):
    SOLVABILITY = "S"
    FEASIBILITY = "F"
    OPTIMALITY = "O"


@dataclass(frozen=True)
class CutEvent:
    kind: CutKind
    k: int
    agent: Optional[int] = None
    y: Optional[float] = None


@dataclass
class AgentCutState:
    eps_k: float
    cut_set: List[float] = field(default_factory=list)
    candidate: Optional[np.ndarray] = None  # None is the "infinitely far" start
    prev_candidate: Optional[np.ndarray] = None
    x_k: Optional[np.ndarray] = None
    counters: tuple = (0, 0, 0, 0)  # h2, e4, e5, e6 after the last check

    def __post_init__(self):
        if not self.eps_k > 0:
            raise ValueError("restriction parameter must be positive")
        self.cut_set = [float(y) for y in self.cut_set]


@dataclass(frozen=True)
class OuterConfig:
    r: float = 10.0
    eps4: float = 0.1
    eps5: float = 0.1
    eps6: float = 0.1
    dpg_tol: DpgTolerances = DpgTolerances()
    alpha0: float = 1.0
    T_cap: int = 100000
    D: Optional[int] = None
    max_iter: int = 200
    dedupe_tol: float = 1e-12
    grid_n: int = 2001
    refine_tol: float = 1e-10
    empty_local: str = "probe"

    def __post_init__(self):
        if not self.r > 1:
            raise ValueError("r must exceed 1")
        if min(self.eps4, self.eps5, self.eps6) <= 0:
            raise ValueError("termination tolerances must be positive")


def initial_states(inst, eps0, Y0=None):
    m = inst.m
    eps0 = np.broadcast_to(np.asarray(eps0, dtype=float), (m,))
    Y0 = Y0 if Y0 is not None else [[] for _ in range(m)]
    if len(Y0) != m:
        raise ValueError("need one initial sample set per agent")
    return [AgentCutState(float(eps0[i]), list(Y0[i]), x_k=np.zeros(inst.n)) for i in range(m)]


def apply_feasibility_cut(state, y_max, dedupe_tol=1e-12):
    """Append ``y_max`` to the sample set; ``eps`` unchanged.

    Near-duplicates are still appended, with a warning, because every
    violated ``y`` must enter the set for the finite-termination argument.
    """
    if any(abs(y_max - y) <= dedupe_tol for y in state.cut_set):
        log.warning("cut point %.17g is within %.1e of an existing cut", y_max, dedupe_tol)
    return replace(state, cut_set=state.cut_set + [float(y_max)])


def apply_optimality_cut(state, r):
    if not r > 1:
        raise ValueError("r must exceed 1")
    return replace(state, eps_k=state.eps_k / r, cut_set=list(state.cut_set))


def apply_solvability_cut(states, r):
    if not r > 1:
        raise ValueError("r must exceed 1")
    return [replace(s, eps_k=s.eps_k / r, cut_set=list(s.cut_set)) for s in states]


def _local_cost(f, z):
    return math.inf if z is None else float(f(z))


def candidate_conditions(adjacency, z, z_prev, costs, eps4, eps5, eps6):
    """Per-agent neighbourhood truth values of the three candidate conditions."""
    m = len(z)
    present = np.array([zi is not None for zi in z])
    both = present & np.array([zp is not None for zp in z_prev])
    dim = next((len(zi) for zi in list(z) + list(z_prev) if zi is not None), 1)
    pts = np.array([zi if zi is not None else np.zeros(dim) for zi in z], dtype=float)

    ok4 = pairwise_ok(adjacency, pts, eps4) & neighborhood_all(adjacency, present)
    loc5 = np.zeros(m, dtype=bool)
    loc6 = np.zeros(m, dtype=bool)
    for j in range(m):
        if both[j]:
            loc5[j] = np.linalg.norm(z[j] - z_prev[j]) <= eps5
            loc6[j] = abs(costs[j](z[j]) - costs[j](z_prev[j])) <= eps6
    return np.vstack([ok4, neighborhood_all(adjacency, loc5), neighborhood_all(adjacency, loc6)])


def algorithm2_check(z, z_prev, costs, sched, S=None, D=None, eps4=0.1, eps5=0.1, eps6=0.1,
                     return_counters=False):
    """Run ``S*D + 1`` slots of the candidate counter protocol.

    Candidates stay fixed during the check. Returns true iff some agent's
    ``h`` counter reaches ``S*D + 1``.
    """
    S = sched.S if S is None else S
    D = union_diameter(sched, S) if D is None else D
    threshold = stop_threshold(S, D)
    counters = Counters(len(z))
    fired = False
    for t in range(threshold):
        adj = sched.adjacency(t)
        ok = candidate_conditions(adj, z, z_prev, costs, eps4, eps5, eps6)
        counters = advance_counters(counters, adj, ok)
        if np.any(counters.h >= threshold):
            fired = True
            break
    return (fired, counters) if return_counters else fired


def candidates_agree(z, z_prev, costs, eps4, eps5, eps6):
    """Brute-force check of the three candidate conditions over all agent pairs."""
    if any(zi is None for zi in z) or any(zp is None for zp in z_prev):
        return False
    Z = np.array(z, dtype=float)
    d = np.linalg.norm(Z[:, None, :] - Z[None, :, :], axis=2)
    return bool(np.max(d) <= eps4
                and all(np.linalg.norm(a - b) <= eps5 for a, b in zip(z, z_prev))
                and all(abs(f(a) - f(b)) <= eps6 for f, a, b in zip(costs, z, z_prev)))


@dataclass
class IterationRecord:
    k: int
    dpg_status: str
    slots: int
    kinds: List[str]
    eps: List[float]
    n_cuts: List[int]
    F_local: float
    F_mean: float
    max_residual: float
    terminated: bool


@dataclass
class RunReport:
    iterations: int
    terminated: bool
    cut_counts: dict
    records: List[IterationRecord]
    candidates: list
    residuals: list
    slots_total: int
    wall_time: float
    states: list
    events: List[CutEvent]

    @property
    def F_trace(self):
        return [r.F_local for r in self.records]

    @property
    def z_mean(self):
        if any(z is None for z in self.candidates):
            return None
        return np.mean(self.candidates, axis=0)

    def F(self, inst):
        zbar = self.z_mean
        return math.inf if zbar is None else evaluate_global_objective(inst, zbar)

    def max_pairwise(self):
        if any(z is None for z in self.candidates):
            return math.inf
        Z = np.array(self.candidates)
        return float(np.max(np.linalg.norm(Z[:, None] - Z[None], axis=2)))


def outer_iteration(k, states, inst, sched, cfg, deadline=None, dpg_kwargs=None):
    """One iteration of the outer loop.

    Returns ``(states', events, terminated, record, dpg_outcome)``.
    """
    m = inst.m
    eps = [s.eps_k for s in states]
    cuts = [s.cut_set for s in states]
    out = run_dpg(inst, eps, cuts, sched, tol=cfg.dpg_tol, alpha0=cfg.alpha0, T_cap=cfg.T_cap,
                  D=cfg.D, empty_local=cfg.empty_local, deadline=deadline, **(dpg_kwargs or {}))
    events = []
    if not out.solved:
        new = apply_solvability_cut(states, cfg.r)
        events.append(CutEvent(CutKind.SOLVABILITY, k))
        rec = IterationRecord(k, out.status.value, out.slots, ["S"] * m, [s.eps_k for s in new],
                              [len(s.cut_set) for s in new], _F_local(inst, new),
                              _F_mean(inst, new), math.nan, False)
        return new, events, False, rec, out

    new, opt_marked, kinds, resid = [], [], [], []
    for i, s in enumerate(states):
        x_i = out.theta[i, :inst.n].copy()
        res = solve_llp(inst.constraints[i], x_i, grid_n=cfg.grid_n, refine_tol=cfg.refine_tol)
        resid.append(res.g_max)
        verdict = feasibility_verdict(res)
        s = replace(s, x_k=x_i, prev_candidate=s.candidate, cut_set=list(s.cut_set))
        if isinstance(verdict, LocallyFeasible):
            s.candidate = x_i
            opt_marked.append(i)
            kinds.append("O")
        else:
            s = apply_feasibility_cut(s, verdict.y_max, cfg.dedupe_tol)
            events.append(CutEvent(CutKind.FEASIBILITY, k, i, verdict.y_max))
            kinds.append("F")
        new.append(s)

    terminated = False
    if opt_marked:
        z = [s.candidate for s in new]
        zp = [s.prev_candidate for s in new]
        terminated, ctr = algorithm2_check(z, zp, inst.costs, sched, D=cfg.D, eps4=cfg.eps4,
                                           eps5=cfg.eps5, eps6=cfg.eps6, return_counters=True)
        for i, s in enumerate(new):
            s.counters = (int(ctr.h[i]),) + tuple(int(v) for v in ctr.e[:, i])
    # optimality cuts come after the termination check
    for i in opt_marked:
        new[i] = apply_optimality_cut(new[i], cfg.r)
        events.append(CutEvent(CutKind.OPTIMALITY, k, i))
    rec = IterationRecord(k, out.status.value, out.slots, kinds, [s.eps_k for s in new],
                          [len(s.cut_set) for s in new], _F_local(inst, new), _F_mean(inst, new),
                          float(max(resid)), terminated)
    return new, events, terminated, rec, out


def _F_local(inst, states):
    return float(sum(_local_cost(f, s.candidate) for f, s in zip(inst.costs, states)))


def _F_mean(inst, states):
    if any(s.candidate is None for s in states):
        return math.inf
    return evaluate_global_objective(inst, np.mean([s.candidate for s in states], axis=0))


def run(inst, sched, cfg=None, eps0=100.0, Y0=None, time_budget=None, callback=None,
        dpg_kwargs=None):
    """Iterate until the candidate protocol fires.

    Parameters
    ----------
    inst : ProblemInstance
    sched : GraphSchedule
    cfg : OuterConfig
    eps0 : float or sequence
        Initial restriction parameter(s).
    Y0 : list of lists, optional
        Initial sample sets; empty by default.
    time_budget : float, optional
        Wall-clock seconds; exceeding it raises :class:`TimeBudgetExceeded`.
    callback : callable, optional
        ``callback(record)`` after every iteration.

    Raises
    ------
    IterationCapExceeded
        When ``cfg.max_iter`` iterations pass without termination.
    """
    cfg = cfg or OuterConfig()
    t0 = time.monotonic()
    deadline = None if time_budget is None else t0 + time_budget
    states = initial_states(inst, eps0, Y0)
    records, events = [], []
    slots = 0
    terminated = False

    def report():
        cands = [s.candidate for s in states]
        resid = [solve_llp(g, z, grid_n=cfg.grid_n, refine_tol=cfg.refine_tol).g_max
                 if z is not None else math.inf for g, z in zip(inst.constraints, cands)]
        counts = {kind.name.lower(): sum(e.kind is kind for e in events) for kind in CutKind}
        return RunReport(len(records), terminated, counts, records, cands, resid, slots,
                         time.monotonic() - t0, states, events)

    for k in range(cfg.max_iter):
        states, ev, terminated, rec, out = outer_iteration(k, states, inst, sched, cfg,
                                                           deadline, dpg_kwargs)
        records.append(rec)
        events.extend(ev)
        slots += out.slots
        log.info("k=%d dpg=%s slots=%d cuts=%s", k, rec.dpg_status, rec.slots, "".join(rec.kinds))
        if callback is not None:
            callback(rec)
        if terminated:
            return report()
        if deadline is not None and time.monotonic() > deadline:
            raise TimeBudgetExceeded(f"time budget of {time_budget:g}s exhausted after "
                                     f"{k + 1} iterations", report())
    raise IterationCapExceeded(f"no termination within {cfg.max_iter} iterations", report())

"""
Euclidean projection onto intersections of convex sets.

An agent's local feasible set is a box intersected with a handful of
sublevel sets ``{z : h(z) <= level}``. Two routes compute the projection:

* an active-set Newton method on the KKT system, fast for the small
  dimensions used here, accepted only when its output passes a KKT check
  (sufficient for optimality on convex problems);
* Dykstra's alternating projections, slow but unconditionally convergent,
  used as the fallback and available on request.
"""

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .problem import BoxSet, ConvexFunction


class ProjectionError(RuntimeError):
    pass


class NoConvergence(ProjectionError):
    """The multiplier search for a sublevel projection did not converge."""


class EmptyIntersectionSuspected(ProjectionError):
    """Alternating projections stalled with residual above tolerance."""

    def __init__(self, msg, point=None, residual=None):
        super().__init__(msg)
        self.point = point
        self.residual = residual


@dataclass(frozen=True)
class Box:
    box: BoxSet


@dataclass(frozen=True)
class Sublevel:
    h: ConvexFunction
    level: float = 0.0


@dataclass(frozen=True)
class Intersection:
    sets: tuple


SetDescriptor = Union[Box, Sublevel, Intersection]


@dataclass
class ProjectionResult:
    point: np.ndarray
    iterations: int
    residual: float
    method: str = ""


@dataclass
class InteriorPoint:
    point: np.ndarray
    violation: float


@dataclass
class LikelyEmpty:
    point: np.ndarray
    violation: float


def flatten(sets):
    """Split descriptors into one merged box (or None) and a list of sublevels."""
    lo = hi = None
    subs = []
    stack = list(sets)[::-1]
    while stack:
        s = stack.pop()
        if isinstance(s, Intersection):
            stack.extend(list(s.sets)[::-1])
        elif isinstance(s, Box):
            if lo is None:
                lo, hi = s.box.lower.copy(), s.box.upper.copy()
            else:
                lo, hi = np.maximum(lo, s.box.lower), np.minimum(hi, s.box.upper)
        elif isinstance(s, Sublevel):
            subs.append(s)
        else:
            raise TypeError(f"not a set descriptor: {s!r}")
    return lo, hi, subs


def max_violation(z, sets):
    """Largest constraint violation of ``z`` over all component sets (>= 0)."""
    lo, hi, subs = flatten(sets)
    v = 0.0
    if lo is not None:
        v = max(v, float(np.max(lo - z, initial=0.0)), float(np.max(z - hi, initial=0.0)))
    for s in subs:
        v = max(v, s.h(z) - s.level)
    return v


def project_box(p, box):
    return np.clip(np.asarray(p, dtype=float), box.lower, box.upper)


def project_sublevel(p, h, level=0.0, tol=1e-10, max_iter=200):
    """Project ``p`` onto ``{z : h(z) <= level}``.

    Solves ``z = p - mu * grad h(z)`` for the multiplier ``mu >= 0`` with
    ``h(z(mu)) = level``: the inner equation by Newton, the outer one by a
    safeguarded secant/bisection search on ``mu``.
    """
    p = np.asarray(p, dtype=float)
    if h(p) <= level:
        return p.copy()

    z = p.copy()

    def z_of(mu, z0):
        z = z0.copy()
        for _ in range(50):
            r = z - p + mu * h.subgradient(z)
            if np.linalg.norm(r) <= 1e-15 * (1.0 + np.linalg.norm(p)):
                break
            J = np.eye(p.size) + mu * h.hessian(z)
            step = np.linalg.solve(J, r)
            z = z - step
            if np.linalg.norm(step) <= 1e-16 * (1.0 + np.linalg.norm(z)):
                break
        return z

    def phi(mu, z0):
        z = z_of(mu, z0)
        return h(z) - level, z

    lo_mu, hi_mu = 0.0, 1.0
    f_lo = h(p) - level
    f_hi, z = phi(hi_mu, z)
    n_expand = 0
    while f_hi > 0:
        lo_mu, f_lo = hi_mu, f_hi
        hi_mu *= 4.0
        f_hi, z = phi(hi_mu, z)
        n_expand += 1
        if n_expand > 60:
            raise NoConvergence("could not bracket the projection multiplier")

    # Illinois-style regula falsi on the bracket [lo_mu, hi_mu]
    side = 0
    z_best = z
    for _ in range(max_iter):
        mu = hi_mu - f_hi * (hi_mu - lo_mu) / (f_hi - f_lo) if f_hi != f_lo else 0.5 * (lo_mu + hi_mu)
        if not lo_mu < mu < hi_mu:
            mu = 0.5 * (lo_mu + hi_mu)
        f_mu, z = phi(mu, z)
        if f_mu > 0:
            lo_mu, f_lo = mu, f_mu
            if side == -1:
                f_hi *= 0.5
            side = -1
        else:
            hi_mu, f_hi, z_best = mu, f_mu, z
            if side == 1:
                f_lo *= 0.5
            side = 1
        if abs(f_mu) <= tol or hi_mu - lo_mu <= 1e-16 * max(1.0, hi_mu):
            return z if f_mu <= tol else z_best
    raise NoConvergence("multiplier search hit the iteration cap")


def _project_component(w, comp):
    if isinstance(comp, tuple):
        return np.clip(w, comp[0], comp[1])
    return project_sublevel(w, comp.h, comp.level)


def dykstra(p, sets, tol=1e-10, max_sweeps=10000):
    """Dykstra's alternating projections onto an intersection of convex sets."""
    p = np.asarray(p, dtype=float)
    lo, hi, subs = flatten(sets)
    comps = ([(lo, hi)] if lo is not None else []) + subs
    z = p.copy()
    if not comps:
        return ProjectionResult(z, 0, 0.0, "dykstra")
    if len(comps) == 1:
        z = _project_component(z, comps[0])
        return ProjectionResult(z, 1, max_violation(z, sets), "dykstra")
    incs = [np.zeros_like(z) for _ in comps]
    for sweep in range(1, max_sweeps + 1):
        z_prev = z
        moved = 0.0
        for k, comp in enumerate(comps):
            w = z + incs[k]
            z = _project_component(w, comp)
            inc = w - z
            moved = max(moved, float(np.linalg.norm(inc - incs[k])))
            incs[k] = inc
        # z alone can stall for a sweep while the corrections still move
        if np.linalg.norm(z - z_prev) < tol and moved < tol:
            res = max_violation(z, sets)
            if res <= tol:
                return ProjectionResult(z, sweep, res, "dykstra")
    res = max_violation(z, sets)
    if res <= tol:
        return ProjectionResult(z, max_sweeps, res, "dykstra")
    raise EmptyIntersectionSuspected(
        f"residual {res:.3e} after {max_sweeps} sweeps", point=z, residual=res)


class _Constraints:
    """Box bounds and sublevel sets as one list of smooth constraints c_j(z) <= 0."""

    def __init__(self, d, lo, hi, subs):
        self.d = d
        self.subs = subs
        self.bounds = []  # (coordinate, sign, bound): sign*(z_k - bound) <= 0
        if lo is not None:
            for k in range(d):
                if np.isfinite(lo[k]):
                    self.bounds.append((k, -1.0, lo[k]))
                if np.isfinite(hi[k]):
                    self.bounds.append((k, 1.0, hi[k]))
        self.ns = len(subs)
        self.count = self.ns + len(self.bounds)

    def value(self, j, z):
        if j < self.ns:
            s = self.subs[j]
            return s.h(z) - s.level
        k, sgn, b = self.bounds[j - self.ns]
        return sgn * (z[k] - b)

    def grad(self, j, z):
        if j < self.ns:
            return self.subs[j].h.subgradient(z)
        k, sgn, _ = self.bounds[j - self.ns]
        g = np.zeros(self.d)
        g[k] = sgn
        return g

    def hess(self, j, z):
        if j < self.ns:
            return self.subs[j].h.hessian(z)
        return None


def _kkt(p, cons, active, z, mu):
    d = p.size
    na = len(active)
    G = np.empty((na, d))
    c = np.empty(na)
    H = np.eye(d)
    r1 = z - p
    for a, j in enumerate(active):
        G[a] = cons.grad(j, z)
        c[a] = cons.value(j, z)
        r1 = r1 + mu[a] * G[a]
        if mu[a] != 0.0:
            Hj = cons.hess(j, z)
            if Hj is not None:
                H = H + mu[a] * Hj
    res = float(np.abs(r1).max())
    if na:
        res = max(res, float(np.abs(c).max()))
    return r1, c, G, H, res


def _solve_eqp(p, cons, active, z, mu, max_newton=60, damped=True):
    """Newton on the KKT system with the ``active`` constraints as equalities.

    ``damped`` halves steps until the KKT residual drops. Near tangent
    constraints the multipliers are large and a full step can raise the
    residual on its way in, so callers retry undamped on failure.
    """
    d = p.size
    na = len(active)
    scale = 1.0 + np.linalg.norm(p)
    r1, c, G, H, res = _kkt(p, cons, active, z, mu)
    for _ in range(max_newton):
        if res <= 1e-14 * scale:
            return z, mu, True
        K = np.zeros((d + na, d + na))
        K[:d, :d] = H
        K[:d, d:] = G.T
        K[d:, :d] = G
        rhs = -np.concatenate([r1, c])
        # one sum catches any inf or nan
        if not math.isfinite(K.sum() + rhs.sum()):
            return z, mu, False
        try:
            step = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            try:
                step = np.linalg.lstsq(K, rhs, rcond=None)[0]
            except np.linalg.LinAlgError:
                return z, mu, False
        if not math.isfinite(step.sum()):
            return z, mu, False
        t = 1.0
        for _ in range(7 if damped else 1):
            z_new, mu_new = z + t * step[:d], mu + t * step[d:]
            kkt = _kkt(p, cons, active, z_new, mu_new)
            if math.isfinite(kkt[4]) and (not damped or kkt[4] < (1.0 - 1e-4 * t) * res):
                break
            t *= 0.5
        else:
            # no descent: converged to rounding, or stuck on a singular system
            return z, mu, res <= 1e-9 * scale
        if t < 1.0 / 16.0:
            # crawling steps mean the full step is what converges; leave it to the undamped retry
            return z_new, mu_new, kkt[4] <= 1e-9 * scale
        z, mu = z_new, mu_new
        r1, c, G, H, res = kkt
    return z, mu, res <= 1e-9 * scale


def _active_set(p, cons, tol, hint=None, max_changes=None, seed_bounds=True, start=None):
    z = p.copy()
    clipped = []
    for a, (k, sgn, b) in enumerate(cons.bounds):
        if sgn * (z[k] - b) > 0:
            z[k] = b
            clipped.append(cons.ns + a)
    if hint is not None:
        active = [j for j in hint if j < cons.count]
    else:
        active = clipped if seed_bounds else []
    mu = np.zeros(len(active))
    if start is not None and hint is not None and len(start[1]) == len(active):
        # the previous solution and multipliers are close for a nearby p
        z, mu = start[0].copy(), start[1].copy()
    if max_changes is None:
        max_changes = 3 * cons.count + 10
    good = None  # last converged (z, mu, active)
    for _ in range(max_changes):
        z_new, mu_new, ok = _solve_eqp(p, cons, active, z, mu)
        if not ok:
            z_new, mu_new, ok = _solve_eqp(p, cons, active, z, mu, damped=False)
        if not ok or not math.isfinite(z_new.sum()):
            if good is None or len(active) < 2:
                return None
            # the newest constraint may replace an older one at a degenerate vertex
            z0, mu0, act0 = good
            jw = active[-1]
            for k in reversed(range(len(act0))):
                trial = act0[:k] + act0[k + 1:] + [jw]
                tm = np.append(np.delete(mu0, k), 0.0)
                z_new, mu_new, ok = _solve_eqp(p, cons, trial, z0, tm)
                if ok and np.all(np.isfinite(z_new)) and mu_new.min() >= -1e-12:
                    active = trial
                    break
            else:
                return None
        z, mu = z_new, mu_new
        good = (z.copy(), mu.copy(), list(active))
        # drop the most negative multiplier first, then add the worst violation
        if mu.size and mu.min() < -1e-12:
            a = int(np.argmin(mu))
            del active[a]
            mu = np.delete(mu, a)
            continue
        worst, jw = tol, -1
        for j in range(cons.count):
            if j in active:
                continue
            v = cons.value(j, z)
            if v > worst:
                worst, jw = v, j
        if jw < 0:
            return z, active, mu
        active.append(jw)
        mu = np.append(mu, 0.0)
    return None


class Projector:
    """Projection onto a fixed intersection, compiled once and reused.

    Keeps the active set of the previous call as a warm start, which is
    what makes repeated projections of nearby points cheap.
    """

    def __init__(self, sets, tol=1e-10, max_sweeps=10000, method="auto"):
        self.sets = tuple(sets)
        self.lo, self.hi, self.subs = flatten(self.sets)
        self.tol = tol
        self.max_sweeps = max_sweeps
        self.method = method
        self.hint = None
        self._warm = None
        self._cons = None

    def violation(self, z):
        v = 0.0
        if self.lo is not None:
            v = max(v, float((self.lo - z).max()), float((z - self.hi).max()))
        for s in self.subs:
            v = max(v, s.h(z) - s.level)
        return v

    def __call__(self, p):
        p = np.asarray(p, dtype=float)
        if self.violation(p) <= 0.0:
            return ProjectionResult(p.copy(), 0, 0.0, "identity")
        if self.method in ("auto", "newton"):
            if self._cons is None:
                self._cons = _Constraints(p.size, self.lo, self.hi, self.subs)
            # a diverging Newton run is caught below and handed to Dykstra
            with np.errstate(invalid="ignore", over="ignore"):
                out = _active_set(p, self._cons, self.tol, hint=self.hint, start=self._warm)
                if out is None:
                    out = _active_set(p, self._cons, self.tol, seed_bounds=False)
            if out is not None:
                z, active, mu = out
                res = self.violation(z)
                if res <= self.tol:
                    if self.lo is not None:
                        z = np.clip(z, self.lo, self.hi)
                    self.hint = active
                    self._warm = (z.copy(), mu)
                    r = ProjectionResult(z, len(active), res, "newton")
                    r.active = active
                    return r
            if self.method == "newton":
                raise ProjectionError("active-set Newton projection failed")
        self.hint = self._warm = None
        rd = dykstra(p, self.sets, tol=self.tol, max_sweeps=self.max_sweeps)
        if self._cons is not None:
            # polish with Newton on the constraints Dykstra left (nearly) active
            cons = self._cons
            near = [j for j in range(cons.count) if cons.value(j, rd.point) > -1e-6]
            with np.errstate(invalid="ignore", over="ignore"):
                out = _active_set(p, cons, self.tol, hint=near)
            if out is not None and np.linalg.norm(out[0] - rd.point) <= 1e-6:
                z = out[0] if self.lo is None else np.clip(out[0], self.lo, self.hi)
                res = self.violation(z)
                if res <= min(self.tol, rd.residual):
                    r = ProjectionResult(z, rd.iterations, res, "dykstra+newton")
                    r.active = out[1]
                    return r
        return rd


def project_intersection(p, sets, tol=1e-10, max_sweeps=10000, method="auto", hint=None):
    """Exact Euclidean projection of ``p`` onto the intersection of ``sets``.

    Parameters
    ----------
    p : array_like
        Point to project.
    sets : sequence of Box, Sublevel or Intersection
    tol : float
        Feasibility tolerance on every component.
    max_sweeps : int
        Dykstra sweep budget.
    method : {"auto", "newton", "dykstra"}
        ``"auto"`` tries the active-set Newton route and falls back to
        Dykstra when that route fails or its result is infeasible; the
        Dykstra point is then polished by Newton on its near-active
        constraints (``method="dykstra+newton"`` in the result).
    hint : list of int, optional
        Active constraint indices from a previous, nearby projection.

    Returns
    -------
    ProjectionResult
    """
    proj = Projector(sets, tol=tol, max_sweeps=max_sweeps, method=method)
    proj.hint = hint
    return proj(p)


def feasibility_probe(sets, strict_margin=1e-8, max_iter=2000, start=None):
    """Look for a strictly interior point of an intersection of convex sets.

    Minimises ``v(z) = max_j (h_j(z) - level_j)`` over the box by projected
    subgradient descent with Polyak-type steps, starting from the box
    centre. Returns ``InteriorPoint`` as soon as ``v < -strict_margin``.
    """
    lo, hi, subs = flatten(sets)
    if start is not None:
        z = np.asarray(start, dtype=float).copy()
    elif lo is not None:
        z = 0.5 * (lo + hi)
    else:
        raise ValueError("feasibility_probe needs a box or a start point")
    clip = (lambda w: np.clip(w, lo, hi)) if lo is not None else (lambda w: w)
    z = clip(z)
    if not subs:
        return InteriorPoint(z, -np.inf)

    def v_and_g(z):
        vals = [s.h(z) - s.level for s in subs]
        j = int(np.argmax(vals))
        return vals[j], subs[j].h.subgradient(z)

    v, g = v_and_g(z)
    best_z, best_v = z, v
    width = np.max(hi - lo) if lo is not None else 1.0
    for it in range(max_iter):
        if best_v < -strict_margin:
            return InteriorPoint(best_z, best_v)
        gn = np.linalg.norm(g)
        if gn == 0.0:
            break
        # step towards a target just below the current best level
        target = min(best_v, 0.0) - max(abs(best_v), 1.0) * 0.5
        step = (v - target) / gn ** 2
        step = min(step, width / (1.0 + it) ** 0.5 / gn * 4.0)
        z = clip(z - step * g)
        v, g = v_and_g(z)
        if v < best_v:
            best_z, best_v = z, v
    if best_v < -strict_margin:
        return InteriorPoint(best_z, best_v)
    return LikelyEmpty(best_z, best_v)

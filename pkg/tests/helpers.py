"""Shared generators and brute-force oracles for the test suite."""

import numpy as np

from drcp.problem import BoxSet, ConvexFunction
from drcp.projection import Box, Sublevel


def quadratic(Q, c, rho):
    Q = np.asarray(Q, dtype=float)
    c = np.asarray(c, dtype=float)
    f = ConvexFunction(lambda z: float((z - c) @ Q @ (z - c)),
                       lambda z: 2.0 * Q @ (z - c),
                       lambda z: 2.0 * Q)
    object.__setattr__(f, "Q", Q)  # kept for the vectorised brute force
    object.__setattr__(f, "c", c)
    return Sublevel(f, rho)


def random_instance(rng, n_sub=None):
    """Box plus up to three ellipse constraints sharing an interior point."""
    lo = rng.uniform(-3.0, -0.5, 2)
    hi = rng.uniform(0.5, 3.0, 2)
    z0 = rng.uniform(lo + 0.1, hi - 0.1)
    sets = [Box(BoxSet(lo, hi))]
    n_sub = rng.integers(0, 4) if n_sub is None else n_sub
    for _ in range(n_sub):
        L = rng.normal(size=(2, 2))
        Q = L @ L.T + 0.2 * np.eye(2)
        c = rng.uniform(-2.0, 2.0, 2)
        rho = float((z0 - c) @ Q @ (z0 - c)) + rng.uniform(0.05, 2.0)
        sets.append(quadratic(Q, c, rho))
    return sets, z0


def feasible_mask(Z, sets, rtol=1e-12):
    # boundary samples can round to just outside their own ellipse
    ok = np.ones(len(Z), dtype=bool)
    for s in sets:
        if isinstance(s, Box):
            ok &= np.all((Z >= s.box.lower) & (Z <= s.box.upper), axis=1)
        else:
            D = Z - s.h.c
            ok &= np.einsum("ki,ij,kj->k", D, s.h.Q, D) <= s.level * (1.0 + rtol)
    return ok


def boundary_pieces(sets):
    """Each constraint boundary as a map from ``t`` in [0, 1] to points."""
    box = sets[0].box
    lo, hi = box.lower, box.upper
    pieces = [lambda t, y=y: np.column_stack([lo[0] + t * (hi[0] - lo[0]), np.full(t.size, y)])
              for y in (lo[1], hi[1])]
    pieces += [lambda t, x=x: np.column_stack([np.full(t.size, x), lo[1] + t * (hi[1] - lo[1])])
               for x in (lo[0], hi[0])]
    for s in sets[1:]:
        M = np.linalg.inv(np.linalg.cholesky(s.h.Q).T) * np.sqrt(s.level)
        pieces.append(lambda t, M=M, c=s.h.c: c + np.column_stack(
            [np.cos(2 * np.pi * t), np.sin(2 * np.pi * t)]) @ M.T)
    return pieces


def boundary_samples(sets, n=200000):
    """Dense samples of every constraint boundary: box edges and ellipses."""
    t = np.linspace(0.0, 1.0, n)
    return np.vstack([piece(t) for piece in boundary_pieces(sets)])


def brute_project(p, sets, n=200000, zoom=3, n_zoom=4001):
    """Nearest feasible point by exhaustive search.

    A point inside the set is its own projection; otherwise the projection
    lies on the boundary. Each boundary piece is sampled densely, then
    resampled ``zoom`` times around its best feasible sample.
    """
    p = np.asarray(p, dtype=float)
    if feasible_mask(p[None, :], sets)[0]:
        return p.copy()
    best, best_d = None, np.inf
    for piece in boundary_pieces(sets):
        t = np.linspace(0.0, 1.0, n)
        for _ in range(zoom + 1):
            Z = piece(t)
            ok = feasible_mask(Z, sets)
            if not ok.any():
                break
            d = np.where(ok, np.linalg.norm(Z - p, axis=1), np.inf)
            k = int(np.argmin(d))
            if d[k] < best_d:
                best, best_d = Z[k], d[k]
            width = 2.0 * (t[1] - t[0])
            t = np.clip(np.linspace(t[k] - width, t[k] + width, n_zoom), 0.0, 1.0)
    return best


def synthetic_stream(rng, m, T, dim=3, rate=None, spike_prob=0.02):
    """States that contract geometrically toward a common point, with random spikes.

    Returns ``(theta, fvals)`` of shapes ``(T, m, dim)`` and ``(T, m)``.
    """
    rate = rng.uniform(0.85, 0.98) if rate is None else rate
    target = rng.normal(size=dim)
    offs = rng.normal(size=(m, dim)) * rng.uniform(0.5, 3.0)
    theta = np.empty((T, m, dim))
    for t in range(T):
        theta[t] = target + offs * rate ** t * np.cos(0.3 * t + np.arange(m))[:, None]
        spikes = rng.random(m) < spike_prob
        theta[t, spikes] += rng.normal(size=(spikes.sum(), dim)) * 0.05
    fvals = np.sum(theta ** 2, axis=2)
    return theta, fvals


def local_conditions(sched, theta, fvals, s, tol):
    """Per agent: its three stopping conditions over its closed in-neighbourhood at slot ``s``."""
    adj = sched.adjacency(s)
    m = theta.shape[1]
    out = np.zeros(m, dtype=bool)
    if s < 1:
        return out
    for i in range(m):
        nb = np.flatnonzero(adj[i])
        c1 = all(np.linalg.norm(theta[s, i] - theta[s, j]) <= tol.eps1 for j in nb)
        c2 = all(np.linalg.norm(theta[s, j] - theta[s - 1, j]) <= tol.eps2 for j in nb)
        c3 = all(abs(fvals[s, j] - fvals[s - 1, j]) <= tol.eps3 for j in nb)
        out[i] = c1 and c2 and c3
    return out


def first_certificate(sched, theta, fvals, tol, D):
    """Run the counters over a stream; return the first slot ``T`` with ``h >= SD+1``."""
    from drcp.dpg import Counters, stop_threshold, update_dpg_counters

    m = theta.shape[1]
    counters = Counters(m)
    thr = stop_threshold(sched.S, D)
    for t in range(theta.shape[0]):
        prev = theta[t - 1] if t > 0 else None
        fprev = fvals[t - 1] if t > 0 else None
        counters = update_dpg_counters(counters, sched.adjacency(t), theta[t], prev,
                                       fvals[t], fprev, tol)
        if np.any(counters.h >= thr):
            return t + 1
    return None


def certificate_slots(sched, theta, fvals, tol, D):
    """Every counter slot ``T`` at which some agent has ``h >= SD+1``."""
    from drcp.dpg import Counters, stop_threshold, update_dpg_counters

    counters = Counters(theta.shape[1])
    thr = stop_threshold(sched.S, D)
    out = []
    for t in range(theta.shape[0]):
        prev = theta[t - 1] if t > 0 else None
        fprev = fvals[t - 1] if t > 0 else None
        counters = update_dpg_counters(counters, sched.adjacency(t), theta[t], prev,
                                       fvals[t], fprev, tol)
        if np.any(counters.h >= thr):
            out.append(t + 1)
    return out

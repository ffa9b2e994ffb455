"""
Periodic time-varying directed communication graphs.

An edge ``(i, j)`` means agent ``i`` transmits to agent ``j`` during the
slot. Self-loops are always present. Mixing weights are uniform over the
closed in-neighbourhood, which makes every ``A(t)`` row-stochastic with
positive entries at least ``1/m``.
"""

from collections import deque
from dataclasses import dataclass
from typing import Tuple

import numpy as np


class NotStronglyConnected(ValueError):
    pass


@dataclass(frozen=True)
class GraphSchedule:
    m: int
    edge_sets: Tuple[Tuple[Tuple[int, int], ...], ...]
    S: int = 1

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("need at least one agent")
        if not self.edge_sets:
            raise ValueError("schedule needs at least one edge set")
        sets = []
        for edges in self.edge_sets:
            es = set()
            for i, j in edges:
                i, j = int(i), int(j)
                if not (0 <= i < self.m and 0 <= j < self.m):
                    raise ValueError(f"edge ({i}, {j}) outside [0, {self.m})")
                es.add((i, j))
            es.update((i, i) for i in range(self.m))
            sets.append(tuple(sorted(es)))
        object.__setattr__(self, "edge_sets", tuple(sets))
        if self.S < 1:
            raise ValueError("S must be >= 1")
        # weight matrices and in-neighbourhoods, one per slot of the period
        mats, nbrs = [], []
        for es in self.edge_sets:
            A = np.zeros((self.m, self.m))
            for i, j in es:
                A[j, i] = 1.0
            nbrs.append(tuple(tuple(np.flatnonzero(A[i])) for i in range(self.m)))
            A /= A.sum(axis=1, keepdims=True)
            A.setflags(write=False)
            mats.append(A)
        object.__setattr__(self, "_mats", tuple(mats))
        object.__setattr__(self, "_nbrs", tuple(nbrs))

    @property
    def period(self):
        return len(self.edge_sets)

    def in_neighbors(self, t):
        """Closed in-neighbourhoods ``N_i^in(t) U {i}`` for every agent."""
        return self._nbrs[t % self.period]

    def adjacency(self, t):
        """Boolean matrix with ``M[i, j]`` true iff ``j`` sends to ``i`` at slot ``t``."""
        return self._mats[t % self.period] > 0


def weights_at(sched, t):
    if t < 0:
        raise ValueError("slot index must be nonnegative")
    return sched._mats[t % sched.period]


def union_edges(sched, start, S):
    edges = set()
    for t in range(start, start + S):
        edges.update(sched.edge_sets[t % sched.period])
    return edges


def _bfs_dist(m, succ, src):
    dist = [-1] * m
    dist[src] = 0
    dq = deque([src])
    while dq:
        u = dq.popleft()
        for v in succ[u]:
            if dist[v] < 0:
                dist[v] = dist[u] + 1
                dq.append(v)
    return dist


def _diameter(m, edges):
    succ = [[] for _ in range(m)]
    for i, j in edges:
        if i != j:
            succ[i].append(j)
    diam = 0
    for s in range(m):
        d = _bfs_dist(m, succ, s)
        if min(d) < 0:
            return None
        diam = max(diam, max(d))
    return diam


def is_ujsc(sched, S=None):
    """True iff every length-``S`` window of the schedule has a strongly connected union."""
    S = sched.S if S is None else S
    if S < 1:
        raise ValueError("S must be >= 1")
    return all(_diameter(sched.m, union_edges(sched, t, S)) is not None
               for t in range(sched.period))


def union_diameter(sched, S=None):
    """Largest diameter of the union graph over all length-``S`` windows."""
    S = sched.S if S is None else S
    D = 0
    for t in range(sched.period):
        d = _diameter(sched.m, union_edges(sched, t, S))
        if d is None:
            raise NotStronglyConnected(f"union over slots [{t}, {t + S}) is not strongly connected")
        D = max(D, d)
    return max(D, 1)


def matrix_product(sched, s, t):
    """Ordered product ``A(s-1) ... A(t)``; identity when ``s == t``."""
    if s < t:
        raise ValueError("need s >= t")
    P = np.eye(sched.m)
    for k in range(t, s):
        P = weights_at(sched, k) @ P
    return P


def row_spread(P):
    """Largest pairwise max-norm distance between rows of ``P``."""
    return float(np.max(P.max(axis=0) - P.min(axis=0)))


# Two alternating slots on six agents. Neither slot alone is strongly
# connected; their union contains the directed ring 0->1->...->5->0 plus
# two chords, so every window of two slots is strongly connected.
DEFAULT6_EDGES = (
    ((0, 1), (2, 3), (4, 5), (0, 3)),
    ((1, 2), (3, 4), (5, 0), (3, 0)),
)


def default6():
    return GraphSchedule(6, DEFAULT6_EDGES, S=2)


def random_ujsc(rng, m, period=None, S=None, extra=0.2):
    """Random periodic schedule that is UJSC with window ``S``.

    A random Hamiltonian cycle is split across the ``S`` slots of every
    window, then each slot receives extra random edges with probability
    ``extra``. For test use.
    """
    S = S if S is not None else int(rng.integers(1, 4))
    period = period if period is not None else S * int(rng.integers(1, 3))
    perm = rng.permutation(m)
    cycle = [(int(perm[k]), int(perm[(k + 1) % m])) for k in range(m)]
    slots = [set() for _ in range(period)]
    # each cycle edge recurs at least once in every window of S slots
    for e in cycle:
        phase = int(rng.integers(S))
        for t in range(phase, period, S):
            slots[t].add(e)
    for t in range(period):
        for i in range(m):
            for j in range(m):
                if i != j and rng.random() < extra:
                    slots[t].add((i, j))
    sched = GraphSchedule(m, tuple(tuple(sorted(s)) for s in slots), S=S)
    assert is_ujsc(sched, S)
    return sched

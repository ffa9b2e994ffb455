"""Project onto a box intersected with two discs.

The active-set Newton route and Dykstra's alternating projections are two
independent ways to compute the same point.
"""

import numpy as np

from drcp import BoxSet, ConvexFunction
from drcp.projection import Box, Sublevel, dykstra, project_intersection


def disc(c, radius):
    c = np.asarray(c, dtype=float)
    f = ConvexFunction(lambda z: float((z - c) @ (z - c)), lambda z: 2 * (z - c),
                       lambda z: 2 * np.eye(2))
    return Sublevel(f, radius ** 2)


sets = [Box(BoxSet(np.array([-2.0, -2.0]), np.array([2.0, 0.6]))),
        disc([-0.5, 0.0], 1.0), disc([0.5, 0.0], 1.0)]
for p in ([0.0, 3.0], [2.0, -2.0], [0.1, 0.1]):
    p = np.array(p)
    a = project_intersection(p, sets)
    b = dykstra(p, sets, tol=1e-12, max_sweeps=100000)
    print(f"p={p}  newton={a.point} ({a.method})  dykstra={b.point}  "
          f"gap={np.linalg.norm(a.point - b.point):.1e}")

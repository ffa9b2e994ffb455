"""Find the worst-case uncertainty value for a fixed decision.

The six-agent example has constraints that are concave in y, so the
maximiser is known in closed form: y* = clamp(x2, -1, 1). The single-agent
example is nonconvex in y and has two local peaks; the grid plus
golden-section search must pick the global one.
"""

import numpy as np

from drcp import build_nonconvex_llp_instance, build_section5_instance, solve_llp

sec5 = build_section5_instance()
print("six-agent example, agent 0")
for x in ([0.0, 0.3], [0.5, 1.4], [-1.0, -2.0]):
    x = np.array(x)
    r = solve_llp(sec5.constraints[0], x)
    print(f"  x={x}  y_max={r.y_max:+.10f}  closed form={np.clip(x[1], -1, 1):+.10f}  "
          f"g_max={r.g_max:+.6f}  certified gap={r.certified_gap:.2e}")

fig9 = build_nonconvex_llp_instance()
g = fig9.constraints[0]
grid = np.linspace(g.y_lo, g.y_hi, 1_000_001)
print("single-agent nonconvex example")
for x in ([1.0, 0.5], [0.4, 0.9], [1.8, 0.1]):
    x = np.array(x)
    r = solve_llp(g, x)
    print(f"  x={x}  y_max={r.y_max:.8f}  g_max={r.g_max:+.10f}  "
          f"dense grid max={g(x, grid).max():+.10f}")

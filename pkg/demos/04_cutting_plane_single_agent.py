"""Outer cutting-plane loop on the single-agent nonconvex example.

Starting from eps = 0.4 and no samples, the loop alternates feasibility
cuts (new worst-case y) and optimality cuts (eps halved) until the
candidate stops moving. The final sample set ends up near {1, 0.31}.
"""

from drcp import GraphSchedule, OuterConfig, build_nonconvex_llp_instance
from drcp.cutting import run as run_cutting_plane

inst = build_nonconvex_llp_instance()
lonely = GraphSchedule(1, ((),), S=1)


def show(rec):
    print(f"k={rec.k}  cut={''.join(rec.kinds)}  eps={rec.eps[0]:.4g}  samples={rec.n_cuts[0]}  "
          f"F={rec.F_local:.6g}  worst violation={rec.max_residual:+.3g}")


rep = run_cutting_plane(inst, lonely, OuterConfig(r=2.0), eps0=0.4, callback=show)
print("terminated:", rep.terminated, " samples:", [round(y, 4) for y in rep.states[0].cut_set])
print("solution:", rep.candidates[0])

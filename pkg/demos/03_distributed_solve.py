"""Solve one restricted problem with the distributed projected gradient.

All six agents use eps = 0.1 and the single sample y = 1. The centralised
solution is x = (0, 0.66875). Inner tolerances are loosened so the
finite-time stopping rule fires within a few thousand slots; at the
reference tolerances the run needs far more slots (see the README).
"""

import numpy as np

from drcp import DpgTolerances, build_section5_instance, default6, run_dpg
from drcp.harness import centralized_oracle

inst = build_section5_instance()
eps, cuts = [0.1] * 6, [[1.0]] * 6
x_ref = centralized_oracle(inst, eps, cuts)


def show(t, theta, avg):
    if t in (1, 10, 100, 1000):
        err = np.linalg.norm(theta[:, :2] - x_ref, axis=1).max()
        print(f"  slot {t:5d}: max distance to centralised solution {err:.4f}")


out = run_dpg(inst, eps, cuts, default6(), tol=DpgTolerances(0.25, 1e-2, 1e-2), callback=show)
print(f"status {out.status.value} after {out.slots} slots")
print("agent states (x1, x2):")
print(np.round(out.theta[:, :2], 4))
print("centralised:", x_ref)

"""
Distributed robust convex programming by cutting surfaces and consensus.

Agents on a time-varying directed network jointly minimise the sum of
their private convex costs subject to private constraints that must hold
for every value of a scalar uncertain parameter.
"""

from .cutting import (AgentCutState, CutEvent, CutKind, IterationCapExceeded, OuterConfig,
                      RunAborted, RunReport, TimeBudgetExceeded, algorithm2_check,
                      apply_feasibility_cut, apply_optimality_cut, apply_solvability_cut,
                      outer_iteration, run)
from .dpg import (AveragedIterate, DpgOutcome, DpgStatus, DpgTolerances, build_epigraph_problem,
                  dpg_global_stop, dpg_step, run_dpg, stepsize, update_dpg_counters)
from .llp import LlpResult, LocallyFeasible, Violated, feasibility_verdict, solve_llp
from .network import (GraphSchedule, NotStronglyConnected, default6, is_ujsc, matrix_product,
                      union_diameter, weights_at)
from .problem import (BoxSet, ConvexFunction, ProblemInstance, RobustConstraint,
                      build_nonconvex_llp_instance, build_section5_instance,
                      evaluate_global_objective, get_instance)
from .projection import (Box, Intersection, Sublevel, feasibility_probe, project_intersection)

__version__ = "0.1.0"

__all__ = [
    "AgentCutState",
    "CutEvent",
    "CutKind",
    "IterationCapExceeded",
    "OuterConfig",
    "RunAborted",
    "RunReport",
    "TimeBudgetExceeded",
    "algorithm2_check",
    "apply_feasibility_cut",
    "apply_optimality_cut",
    "apply_solvability_cut",
    "outer_iteration",
    "run",
    "AveragedIterate",
    "DpgOutcome",
    "DpgStatus",
    "DpgTolerances",
    "build_epigraph_problem",
    "dpg_global_stop",
    "dpg_step",
    "run_dpg",
    "stepsize",
    "update_dpg_counters",
    "LlpResult",
    "LocallyFeasible",
    "Violated",
    "feasibility_verdict",
    "solve_llp",
    "GraphSchedule",
    "NotStronglyConnected",
    "default6",
    "is_ujsc",
    "matrix_product",
    "union_diameter",
    "weights_at",
    "BoxSet",
    "ConvexFunction",
    "ProblemInstance",
    "RobustConstraint",
    "build_nonconvex_llp_instance",
    "build_section5_instance",
    "evaluate_global_objective",
    "get_instance",
    "Box",
    "Intersection",
    "Sublevel",
    "feasibility_probe",
    "project_intersection",
]

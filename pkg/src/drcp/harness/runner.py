"""Execute configs and presets, writing CSV and SVG artefacts."""

import logging
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .. import cutting
from ..dpg import run_dpg, trace_header
from .oracle import Infeasible, centralized_oracle
from .output import CsvStream, line_chart, write_csv

log = logging.getLogger(__name__)

F_STAR = {"section5": 44.0 + 42.0 / 16.0 - 3.0 * math.sqrt(7.0)}


@dataclass
class RunResult:
    config: object
    kind: str
    summary: dict
    files: list = field(default_factory=list)
    report: object = None
    outcome: object = None
    aborted: Exception = None


def _eps_list(cfg, m):
    return list(np.broadcast_to(np.asarray(cfg.eps0, dtype=float), (m,)))


def _Y0(cfg, m):
    return [list(map(float, ys)) for ys in cfg.Y0] if cfg.Y0 is not None else [[] for _ in range(m)]


def run_config(cfg, out_dir=None):
    """Run one config and write its artefacts under ``out_dir/cfg.name``."""
    inst = cfg.build_instance()
    sched = cfg.build_schedule(inst.m)
    root = os.path.join(out_dir or cfg.out_dir, cfg.name)
    os.makedirs(root, exist_ok=True)
    if cfg.task == "dpg":
        return _run_dpg_task(cfg, inst, sched, root)
    return _run_cutting_task(cfg, inst, sched, root)


SUMMARY_CUTTING = ["name", "instance", "eps0", "r", "terminated", "iterations", "solvability_cuts",
                   "feasibility_cuts", "optimality_cuts", "slots_total", "F_mean", "F_local",
                   "max_pairwise", "feasibility"]


def _run_cutting_task(cfg, inst, sched, root):
    m = inst.m
    aborted = None
    try:
        rep = cutting.run(inst, sched, cfg.outer(m), eps0=_eps_list(cfg, m), Y0=_Y0(cfg, m),
                          time_budget=cfg.time_budget)
    except cutting.RunAborted as exc:
        rep, aborted = exc.report, exc
    files = []
    header = (["k", "dpg_status", "slots", "cuts"] + [f"eps_{i}" for i in range(m)]
              + [f"n_cuts_{i}" for i in range(m)] + ["F_local", "F_mean", "max_residual", "terminated"])
    rows = [[r.k, r.dpg_status, r.slots, "".join(r.kinds)] + r.eps + r.n_cuts
            + [r.F_local, r.F_mean, r.max_residual, r.terminated] for r in rep.records]
    files.append(write_csv(os.path.join(root, "iterations.csv"), header, rows))

    ks = [r.k for r in rep.records]
    series = [("sum f_i(z_i)", ks, [r.F_local for r in rep.records]),
              ("F(mean z)", ks, [r.F_mean for r in rep.records])]
    if inst.name in F_STAR and ks:
        series.append(("F*", [ks[0], ks[-1]], [F_STAR[inst.name]] * 2))
    files.append(line_chart(os.path.join(root, "F_trace.svg"), series,
                            title=f"{cfg.name}: objective per outer iteration",
                            xlabel="outer iteration k", ylabel="objective"))
    cand_rows = [[i] + (list(z) if z is not None else [math.inf] * inst.n) + [rep.residuals[i]]
                 for i, z in enumerate(rep.candidates)]
    files.append(write_csv(os.path.join(root, "candidates.csv"),
                           ["agent"] + [f"z{k}" for k in range(inst.n)] + ["g_max"], cand_rows))
    summary = dict(name=cfg.name, instance=inst.name,
                   eps0=cfg.eps0 if not isinstance(cfg.eps0, list) else min(cfg.eps0),
                   r=cfg.r, terminated=rep.terminated, iterations=rep.iterations,
                   solvability_cuts=rep.cut_counts["solvability"],
                   feasibility_cuts=rep.cut_counts["feasibility"],
                   optimality_cuts=rep.cut_counts["optimality"], slots_total=rep.slots_total,
                   F_mean=rep.F(inst),
                   F_local=rep.records[-1].F_local if rep.records else math.inf,
                   max_pairwise=rep.max_pairwise(), feasibility=float(max(rep.residuals)))
    files.append(write_csv(os.path.join(root, "summary.csv"), SUMMARY_CUTTING,
                           [[summary[k] for k in SUMMARY_CUTTING]]))
    return RunResult(cfg, "cutting", summary, files, report=rep, aborted=aborted)


SUMMARY_DPG = ["name", "instance", "status", "slots", "criterion_first_slot", "max_oracle_error",
               "max_disagreement", "x_mean_0", "x_mean_1"]


def _run_dpg_task(cfg, inst, sched, root):
    m, n = inst.m, inst.n
    eps, cuts = _eps_list(cfg, m), _Y0(cfg, m)
    try:
        x_ref = centralized_oracle(inst, eps, cuts)
    except Infeasible:
        x_ref = None
    errs = []

    def cb(t, theta, avg):
        if t % cfg.trace_every == 0:
            X = theta[:, :n]
            dis = np.linalg.norm(X - X.mean(axis=0), axis=1)
            e = np.linalg.norm(X - x_ref, axis=1) if x_ref is not None else np.full(m, math.nan)
            errs.append([t] + list(e) + list(dis))

    trace_path = os.path.join(root, "trace.csv")
    deadline = None if cfg.time_budget is None else time.monotonic() + cfg.time_budget
    with CsvStream(trace_path, trace_header(n)) as tr:
        out = run_dpg(inst, eps, cuts, sched, tol=cfg.dpg_tol(), alpha0=cfg.alpha0,
                      T_cap=cfg.T_cap, D=cfg.resolve_D(m), empty_local=cfg.empty_local,
                      callback=cb, trace=tr, trace_every=cfg.trace_every, record_criterion=True,
                      deadline=deadline)
    files = [trace_path]
    header = (["slot"] + [f"err_{i}" for i in range(m)] + [f"disagreement_{i}" for i in range(m)])
    files.append(write_csv(os.path.join(root, "errors.csv"), header, errs))
    if errs:
        E = np.array(errs)
        if x_ref is not None:
            files.append(line_chart(os.path.join(root, "oracle_error.svg"),
                                    [(f"agent {i}", E[:, 0], E[:, 1 + i]) for i in range(m)],
                                    title=f"{cfg.name}: distance to centralised solution",
                                    xlabel="slot t", ylabel="||x_i(t) - x_ref||", logy=True))
        files.append(line_chart(os.path.join(root, "disagreement.svg"),
                                [(f"agent {i}", E[:, 0], E[:, 1 + m + i]) for i in range(m)],
                                title=f"{cfg.name}: disagreement", xlabel="slot t",
                                ylabel="||x_i(t) - mean x(t)||", logy=True))
    X = out.theta[:, :n] if out.theta is not None else None
    summary = dict(name=cfg.name, instance=inst.name, status=out.status.value, slots=out.slots,
                   criterion_first_slot=out.criterion_first_slot,
                   max_oracle_error=(float(np.max(np.linalg.norm(X - x_ref, axis=1)))
                                     if X is not None and x_ref is not None else math.nan),
                   max_disagreement=(float(np.max(np.linalg.norm(X - X.mean(axis=0), axis=1)))
                                     if X is not None else math.nan),
                   x_mean_0=float(X[:, 0].mean()) if X is not None else math.nan,
                   x_mean_1=float(X[:, 1].mean()) if X is not None and n > 1 else math.nan)
    files.append(write_csv(os.path.join(root, "summary.csv"), SUMMARY_DPG,
                           [[summary[k] for k in SUMMARY_DPG]]))
    return RunResult(cfg, "dpg", summary, files, outcome=out)


def run_preset(preset, out_dir="out"):
    """Run every config of a preset; sweeps also get a combined summary and chart."""
    results = [run_config(c, out_dir) for c in preset.configs]
    if preset.sweep is not None:
        root = os.path.join(out_dir, preset.name)
        rows = [[getattr(r.config, preset.sweep)] + [r.summary[k] for k in SUMMARY_CUTTING]
                for r in results]
        path = write_csv(os.path.join(root, "sweep_summary.csv"), [preset.sweep] + SUMMARY_CUTTING,
                         rows)
        xs = [row[0] for row in rows]
        chart = line_chart(os.path.join(root, "cut_counts.svg"),
                           [(lab, xs, [r.summary[k] for r in results]) for lab, k in
                            (("solvability", "solvability_cuts"),
                             ("feasibility", "feasibility_cuts"),
                             ("iterations", "iterations"))],
                           title=f"{preset.name}: cut counts", xlabel=preset.sweep, ylabel="count",
                           logx=True)
        results[-1].files.extend([path, chart])
    return results

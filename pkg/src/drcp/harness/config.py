"""
JSON run configuration: parsing, defaults and validation.

Field names match :class:`RunConfig` attributes exactly. Any field left
out takes the default of the six-agent reference experiment.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, fields
from typing import List, Optional, Union

from ..cutting import OuterConfig
from ..dpg import DpgTolerances
from ..network import GraphSchedule, default6, is_ujsc
from ..problem import INSTANCES, get_instance

log = logging.getLogger(__name__)


class ConfigError(Exception):
    pass


class ParseError(ConfigError):
    pass


class ValidationError(ConfigError):
    def __init__(self, field_name, msg):
        super().__init__(f"{field_name}: {msg}")
        self.field = field_name


@dataclass
class RunConfig:
    name: str = "run"
    task: str = "cutting"  # "cutting" (outer loop) or "dpg" (one restricted problem)
    instance: str = "section5"
    schedule: Union[str, list] = "default6"
    S: Optional[int] = None
    D: Union[str, int] = "auto"
    eps0: Union[float, List[float]] = 100.0
    r: float = 10.0
    Y0: Optional[List[List[float]]] = None
    eps1: float = 1e-2
    eps2: float = 1e-6
    eps3: float = 1e-6
    eps4: float = 0.1
    eps5: float = 0.1
    eps6: float = 0.1
    alpha0: float = 1.0
    T_cap: int = 100000
    max_iter: int = 200
    empty_local: str = "probe"
    time_budget: Optional[float] = None
    trace_every: int = 10
    out_dir: str = "out"
    seed: int = 0  # reserved; every stage is deterministic

    def to_dict(self):
        return asdict(self)

    # derived objects

    def build_instance(self):
        return get_instance(self.instance)

    def build_schedule(self, m):
        if self.schedule == "default6":
            sched = default6()
            if self.S is not None and self.S != sched.S:
                sched = GraphSchedule(sched.m, sched.edge_sets, S=self.S)
        else:
            sched = GraphSchedule(m, tuple(tuple(tuple(e) for e in es) for es in self.schedule),
                                  S=self.S or 1)
        if sched.m != m:
            raise ValidationError("schedule", f"has {sched.m} nodes, instance has {m} agents")
        return sched

    def resolve_D(self, m):
        if self.D == "auto":
            return None
        if self.D == "m-1":
            return m - 1
        return int(self.D)

    def dpg_tol(self):
        return DpgTolerances(self.eps1, self.eps2, self.eps3)

    def outer(self, m):
        return OuterConfig(r=self.r, eps4=self.eps4, eps5=self.eps5, eps6=self.eps6,
                           dpg_tol=self.dpg_tol(), alpha0=self.alpha0, T_cap=self.T_cap,
                           D=self.resolve_D(m), max_iter=self.max_iter,
                           empty_local=self.empty_local)


FIELD_NAMES = tuple(f.name for f in fields(RunConfig))


def _positive(name, v):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
        raise ValidationError(name, f"must be a positive number, got {v!r}")


def _posint(name, v):
    if isinstance(v, bool) or not isinstance(v, int) or v < 1:
        raise ValidationError(name, f"must be a positive integer, got {v!r}")


def validate(cfg):
    """Check every field; returns the list of precision warnings issued."""
    warnings = []
    if cfg.task not in ("cutting", "dpg"):
        raise ValidationError("task", "must be 'cutting' or 'dpg'")
    if cfg.instance not in INSTANCES:
        raise ValidationError("instance", f"unknown instance {cfg.instance!r}; "
                              f"known: {', '.join(sorted(INSTANCES))}")
    inst = cfg.build_instance()
    m = inst.m
    if isinstance(cfg.r, bool) or not isinstance(cfg.r, (int, float)) or not cfg.r > 1:
        raise ValidationError("r", f"must exceed 1, got {cfg.r!r}")
    eps0 = cfg.eps0 if isinstance(cfg.eps0, list) else [cfg.eps0]
    if isinstance(cfg.eps0, list) and len(eps0) != m:
        raise ValidationError("eps0", f"needs {m} entries, got {len(eps0)}")
    for v in eps0:
        _positive("eps0", v)
    for name in ("eps1", "eps2", "eps3", "eps4", "eps5", "eps6", "alpha0"):
        _positive(name, getattr(cfg, name))
    for name in ("T_cap", "max_iter", "trace_every"):
        _posint(name, getattr(cfg, name))
    if cfg.S is not None:
        _posint("S", cfg.S)
    if cfg.time_budget is not None:
        _positive("time_budget", cfg.time_budget)
    if cfg.empty_local not in ("probe", "relax"):
        raise ValidationError("empty_local", "must be 'probe' or 'relax'")
    if not (cfg.D in ("auto", "m-1") or (isinstance(cfg.D, int) and not isinstance(cfg.D, bool)
                                          and cfg.D >= 1)):
        raise ValidationError("D", "must be 'auto', 'm-1' or a positive integer")
    if cfg.Y0 is not None:
        if not isinstance(cfg.Y0, list) or len(cfg.Y0) != m:
            raise ValidationError("Y0", f"needs one list per agent ({m})")
        for i, ys in enumerate(cfg.Y0):
            g = inst.constraints[i]
            for y in ys:
                if not isinstance(y, (int, float)) or not g.y_lo <= y <= g.y_hi:
                    raise ValidationError("Y0", f"agent {i}: {y!r} outside [{g.y_lo}, {g.y_hi}]")
    if cfg.schedule != "default6":
        if not isinstance(cfg.schedule, list) or not cfg.schedule:
            raise ValidationError("schedule", "must be 'default6' or a non-empty list of edge lists")
        try:
            for es in cfg.schedule:
                for e in es:
                    if len(e) != 2:
                        raise ValueError(f"edge {e!r} is not a pair")
        except TypeError as exc:
            raise ValidationError("schedule", str(exc))
    try:
        sched = cfg.build_schedule(m)
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("schedule", str(exc))
    if not is_ujsc(sched):
        raise ValidationError("schedule", f"not strongly connected over windows of S={sched.S}")

    # precision guardrails
    if min(eps0) < 1e-7:
        warnings.append(f"eps0={min(eps0):g} is below 1e-7; cuts may stall at floating-point precision")
    if cfg.r > 1e3:
        warnings.append(f"r={cfg.r:g} exceeds 1e3; restriction shrinks very fast")
    if max(cfg.eps1, cfg.eps2, cfg.eps3) * 10 > min(cfg.eps4, cfg.eps5, cfg.eps6):
        warnings.append("inner tolerances eps1..eps3 are not 10x below outer tolerances eps4..eps6")
    for w in warnings:
        log.warning(w)
    return warnings


def config_from_dict(d):
    if not isinstance(d, dict):
        raise ParseError("top-level JSON value must be an object")
    unknown = sorted(set(d) - set(FIELD_NAMES))
    if unknown:
        raise ValidationError(unknown[0], "unknown field")
    cfg = RunConfig(**d)
    cfg.warnings = validate(cfg)
    return cfg


def load_config(path):
    """Read, fill defaults, validate.

    Raises
    ------
    ParseError
        File missing or not valid JSON.
    ValidationError
        A field is out of range; ``.field`` names it.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})")
    return config_from_dict(d)

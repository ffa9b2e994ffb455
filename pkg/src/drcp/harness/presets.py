"""
Named experiment presets.

Every preset expands to a list of :class:`RunConfig`. The ``paper``
profile uses the reference tolerances unchanged. The ``desk`` profile
loosens the inner DPG tolerances so that a laptop run finishes in
minutes; see the README for what that trades away.
"""

from dataclasses import dataclass, replace
from typing import Optional

from .config import RunConfig, validate

# Inner/outer tolerances that let the six-agent example terminate in about
# 2e4 slots per inner solve.
DESK = dict(eps1=0.25, eps2=1e-2, eps3=1e-2, eps4=0.5, eps5=0.5, eps6=0.5, T_cap=20000)


@dataclass(frozen=True)
class ExperimentPreset:
    name: str
    configs: tuple
    sweep: Optional[str] = None  # RunConfig field varied across configs


def _section5(**kw):
    base = dict(name="section5", instance="section5", time_budget=300.0)
    base.update(kw)
    return RunConfig(**base)


def _build(name):
    if name == "section5":
        return ExperimentPreset(name, (_section5(),))
    if name == "dpg_solvable":
        return ExperimentPreset(name, (RunConfig(name="dpg_solvable", task="dpg", eps0=0.1,
                                                 Y0=[[1.0]] * 6),))
    if name == "dpg_unsolvable":
        return ExperimentPreset(name, (RunConfig(name="dpg_unsolvable", task="dpg", eps0=5.0,
                                                 Y0=[[1.0]] * 6, empty_local="relax"),))
    if name == "sweep_eps0":
        grid = (1e-2, 1.0, 1e2, 1e4)
        return ExperimentPreset(name, tuple(_section5(name=f"sweep_eps0_{v:g}", eps0=v, r=2.0)
                                            for v in grid), sweep="eps0")
    if name == "sweep_r":
        grid = (1.5, 2.0, 5.0, 10.0, 100.0, 1000.0)
        return ExperimentPreset(name, tuple(_section5(name=f"sweep_r_{v:g}", r=v) for v in grid),
                                sweep="r")
    if name == "fig9_single_agent":
        return ExperimentPreset(name, (RunConfig(name="fig9_single_agent", instance="fig9",
                                                 schedule=[[]], S=1, eps0=0.4, r=2.0,
                                                 time_budget=300.0),))
    raise KeyError(f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}")


PRESET_NAMES = ("section5", "dpg_solvable", "dpg_unsolvable", "sweep_eps0", "sweep_r",
                "fig9_single_agent")


def get_preset(name, profile="paper"):
    """Expand a preset name into its configs.

    Parameters
    ----------
    profile : {"paper", "desk"}
        ``"desk"`` applies :data:`DESK` to every config.
    """
    preset = _build(name)
    if profile == "desk":
        preset = replace(preset, configs=tuple(replace(c, **DESK) for c in preset.configs))
    elif profile != "paper":
        raise ValueError("profile must be 'paper' or 'desk'")
    for c in preset.configs:
        validate(c)
    return preset

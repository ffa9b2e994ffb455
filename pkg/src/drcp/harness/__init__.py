"""Configuration, presets, reference oracle and file output."""

from .config import ParseError, RunConfig, ValidationError, load_config, validate
from .oracle import Infeasible, centralized_oracle
from .presets import PRESET_NAMES, get_preset
from .runner import run_config, run_preset

__all__ = ["ParseError", "RunConfig", "ValidationError", "load_config", "validate",
           "Infeasible", "centralized_oracle", "PRESET_NAMES", "get_preset", "run_config",
           "run_preset"]

"""Sweeps, figure recipes and the acceptance suite behind the ``spinqtm`` command."""

from .acceptance import CRITERIA, SUITES, CriterionResult, run_acceptance
from .config import ConfigError, SweepConfig, load_config, parse_config
from .sweep import COLUMNS, SweepResult, run_sweep

__all__ = [
    "CRITERIA",
    "SUITES",
    "COLUMNS",
    "ConfigError",
    "CriterionResult",
    "SweepConfig",
    "SweepResult",
    "load_config",
    "parse_config",
    "run_acceptance",
    "run_sweep",
]

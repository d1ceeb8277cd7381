"""URLLC and federated-learning coexistence simulator."""

from ._coexist import (
    Config,
    ConfigError,
    NumericError,
    OutputError,
    availability,
    config_keys,
    iteration_delay,
    percentile,
    required_uploads,
    run_scenario,
    survival,
    sweep_eval1,
)

__all__ = [
    "Config",
    "ConfigError",
    "NumericError",
    "OutputError",
    "availability",
    "config_keys",
    "iteration_delay",
    "percentile",
    "required_uploads",
    "run_scenario",
    "survival",
    "sweep_eval1",
]

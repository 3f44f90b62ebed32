"""Experiment configs, orchestration, reproducible outputs and the ``ccf`` CLI."""

from .config import ConfigError, ExperimentConfig, from_dict, load, loads, validate
from .plots import emit_plots, line_chart, render_plots
from .runner import RunManifest, certify_trajectory, initial_field, load_trajectory, run_experiment

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "RunManifest",
    "certify_trajectory",
    "emit_plots",
    "from_dict",
    "initial_field",
    "line_chart",
    "load",
    "load_trajectory",
    "loads",
    "render_plots",
    "run_experiment",
    "validate",
]

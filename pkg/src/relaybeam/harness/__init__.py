"""Scenario configs, Monte Carlo drivers, CSV output and the CLI."""

from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .experiments import (
    EXPERIMENTS,
    ExperimentResult,
    ResultRow,
    preset,
    run_complexity_probe,
    run_experiment,
    run_mse_bounds_figure,
    run_named,
    run_pc_selection,
    run_snapshot_trace,
    run_trial,
)
from .output import CSV_HEADER, emit_csv, emit_plot_data, read_csv

__all__ = [
    "CSV_HEADER",
    "ConfigError",
    "EXPERIMENTS",
    "ExperimentResult",
    "ResultRow",
    "ScenarioConfig",
    "emit_csv",
    "emit_plot_data",
    "load_config",
    "parse_config",
    "preset",
    "read_csv",
    "run_complexity_probe",
    "run_experiment",
    "run_mse_bounds_figure",
    "run_named",
    "run_pc_selection",
    "run_snapshot_trace",
    "run_trial",
]

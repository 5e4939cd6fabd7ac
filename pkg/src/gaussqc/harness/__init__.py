"""Reproducible experiment harness: configs, seeded runs, reports and CLI."""

from .config import ExperimentConfig, config_from_dict
from .runner import ExperimentReport, aggregate, merge_reports, run_experiment

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "aggregate",
    "config_from_dict",
    "merge_reports",
    "run_experiment",
]

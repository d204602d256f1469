"""Scenario generators, metrics, file formats and the command-line interface."""

from .bench import BenchResult, run_scenario
from .generators import (
    SCENARIOS,
    ScenarioSpec,
    gen_covariance,
    gen_exp_images,
    gen_mixed,
    gen_multi3,
    generate,
)
from .metrics import MetricsReport, adjusted_rand_index, evaluate_multi, evaluate_single, rand_index

__all__ = [
    "BenchResult",
    "run_scenario",
    "SCENARIOS",
    "ScenarioSpec",
    "gen_covariance",
    "gen_exp_images",
    "gen_mixed",
    "gen_multi3",
    "generate",
    "MetricsReport",
    "adjusted_rand_index",
    "evaluate_multi",
    "evaluate_single",
    "rand_index",
]

"""Multifidelity Monte Carlo estimation for budgets of any size."""

from .allocation import (
    RelaxedSolution,
    SamplingPlan,
    allocate,
    allocate_mc,
    allocate_modified,
    allocate_naive_rounded,
    brute_force_mip,
    predict_mse,
    solve_relaxed,
    variance_ratio,
)
from .ensemble import (
    EnsembleStatistics,
    LogNormal,
    Model,
    Normal,
    RandomInputSpec,
    Uniform,
    draw_pilot,
    estimate_statistics,
)
from .estimator import EstimateReport, mc_estimate, mfmc_estimate, run_experiment
from .selection import SelectionResult, select_models

__version__ = "0.1.0"

__all__ = [
    "EnsembleStatistics",
    "EstimateReport",
    "LogNormal",
    "Model",
    "Normal",
    "RandomInputSpec",
    "RelaxedSolution",
    "SamplingPlan",
    "SelectionResult",
    "Uniform",
    "allocate",
    "allocate_mc",
    "allocate_modified",
    "allocate_naive_rounded",
    "brute_force_mip",
    "draw_pilot",
    "estimate_statistics",
    "mc_estimate",
    "mfmc_estimate",
    "predict_mse",
    "run_experiment",
    "select_models",
    "solve_relaxed",
    "variance_ratio",
]

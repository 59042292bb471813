"""End-to-end pipeline: statistics, selection, allocation and repeated runs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .benchmarks.burgers import burgers_ensemble
from .benchmarks.published import published_statistics
from .benchmarks.short_column import short_column_input_spec, short_column_models
from .config import PILOT_STREAM, TRAINING_STREAM, ExperimentConfig
from .ensemble import EnsembleStatistics, Model, RandomInputSpec, draw_pilot, estimate_statistics
from .errors import ConfigError, MFMCError
from .estimator import ExperimentResult, run_experiment
from .rng import seed_sequence
from .selection import SelectionResult, select_models

# FOM reference solves hold one (chunk, 256) state in memory
BURGERS_REFERENCE_CHUNK = 20_000


@dataclass
class Benchmark:
    """Models and input distribution of a benchmark, or neither for custom stats."""

    name: str
    models: list[Model] | None
    input_spec: RandomInputSpec | None
    reference_chunk: int = 1_000_000

    @property
    def samplable(self) -> bool:
        return self.models is not None


def resolve_benchmark(config: ExperimentConfig) -> Benchmark:
    if config.benchmark == "short-column":
        return Benchmark(
            "short-column", short_column_models(), short_column_input_spec(config.lognormal_convention)
        )
    if config.benchmark == "burgers":
        ens = burgers_ensemble(
            seed_sequence(config.seed, TRAINING_STREAM),
            n_training=config.training_samples,
            z2_range=config.z2_range,
        )
        return Benchmark("burgers", ens.models, ens.input_spec, BURGERS_REFERENCE_CHUNK)
    return Benchmark(config.benchmark, None, None)


def custom_statistics(config: ExperimentConfig) -> EnsembleStatistics:
    try:
        return EnsembleStatistics.from_dict(config.stats)
    except (KeyError, TypeError, ValueError, MFMCError) as exc:
        raise ConfigError(f"invalid statistics block: {exc}", "stats") from exc


def pilot_statistics(config: ExperimentConfig, bench: Benchmark) -> tuple[EnsembleStatistics, np.ndarray]:
    """Statistics from a fresh pilot draw, with the models' nominal costs."""
    pilot = draw_pilot(
        bench.models,
        bench.input_spec,
        config.pilot_size,
        seed_sequence(config.seed, PILOT_STREAM),
        max_workers=config.max_workers,
    )
    stats = estimate_statistics(pilot, [m.cost for m in bench.models], [m.id for m in bench.models])
    return stats, pilot


def ensemble_statistics(config: ExperimentConfig, bench: Benchmark) -> EnsembleStatistics:
    """Statistics that drive selection and allocation.

    With ``stats_source="paper"`` the published correlations and costs are
    used and only the standard deviations come from the pilot.
    """
    if not bench.samplable:
        return custom_statistics(config)
    stats, _ = pilot_statistics(config, bench)
    if config.stats_source == "paper":
        return published_statistics(config.benchmark, sigma=stats.sigma)
    return stats


def choose_subset(
    config: ExperimentConfig, stats: EnsembleStatistics
) -> tuple[list[int], SelectionResult | None]:
    """Indices of the models to use, from ``config.models`` or by selection."""
    if config.models is not None:
        missing = [m for m in config.models if m not in stats.names]
        if missing:
            raise ConfigError(f"unknown model ids {missing}; available {stats.names}", "models")
        return [stats.names.index(m) for m in config.models], None
    sel = select_models(stats)
    return sel.selected_indices, sel


@dataclass
class PipelineResult:
    config: ExperimentConfig
    stats: EnsembleStatistics
    selection: SelectionResult | None
    subset: list[int]
    experiment: ExperimentResult

    @property
    def selected_stats(self) -> EnsembleStatistics:
        return self.stats.subset(self.subset)

    @property
    def w1(self) -> float:
        return float(self.stats.costs[0])


def run_pipeline(config: ExperimentConfig) -> PipelineResult:
    bench = resolve_benchmark(config)
    if not bench.samplable:
        raise ConfigError("experiments need a benchmark with models", "benchmark")
    stats = ensemble_statistics(config, bench)
    subset, selection = choose_subset(config, stats)
    sub_stats = stats.subset(subset)
    models = [bench.models[i] for i in subset]
    w1 = float(stats.costs[0])
    result = run_experiment(
        models,
        sub_stats,
        bench.input_spec,
        budgets=[b * w1 for b in config.budgets],
        n_runs=config.n_runs,
        reference_samples=config.reference_size,
        seed=config.seed,
        methods=tuple(config.methods),
        max_workers=config.max_workers,
        reference_chunk=bench.reference_chunk,
    )
    return PipelineResult(config, stats, selection, subset, result)

"""Exhaustive model selection."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .allocation import correlation_gaps, cost_ratio_holds
from .ensemble import EnsembleStatistics
from .errors import MFMCError, TiedCorrelationError, TooManyModelsError

MAX_MODELS = 20


@dataclass
class SelectionResult:
    """Chosen models as indices into the input statistics.

    ``selected_indices`` starts with 0 and follows decreasing squared
    correlation, which is the order allocation expects.
    """

    selected_indices: list[int]
    predicted_variance: float
    benchmark_budget: float
    names: list[str]

    def to_dict(self) -> dict:
        return {
            "selected_indices": list(self.selected_indices),
            "selected": list(self.names),
            "predicted_variance": self.predicted_variance,
            "benchmark_budget": self.benchmark_budget,
        }


def subset_variance(stats: EnsembleStatistics, indices, budget: float) -> float:
    """Predicted relaxed-optimum variance of the estimator built from ``indices``.

    ``indices`` must already be in decreasing order of squared correlation.
    """
    sub = stats.subset(indices)
    terms = np.sqrt(sub.costs * correlation_gaps(sub.rho1))
    return float(stats.sigma[0] ** 2 / budget * math.fsum(terms) ** 2)


def select_models(
    stats: EnsembleStatistics,
    budget: float | None = None,
    max_models: int = MAX_MODELS,
) -> SelectionResult:
    """Return the subset containing model 0 with the lowest predicted variance.

    Every subset of the surrogates is tried. Within a candidate, models are
    sorted by decreasing squared correlation with model 0; candidates that
    violate the cost-ratio condition (equality included) are skipped. The
    predicted variance of a candidate is

        sigma[0]**2 / budget * (sum_j sqrt(w[i_j] * (rho2[i_j] - rho2[i_{j+1}])))**2

    and plain Monte Carlo, ``sigma[0]**2 * w[0] / budget``, is the starting
    point. ``budget`` defaults to ``w[0]``; it only scales the variances and
    never changes the chosen subset. Ties go to the smaller, then
    lexicographically first, subset.
    """
    k = stats.k
    if k > max_models:
        raise TooManyModelsError(f"{k} models exceed the exhaustive-search cap of {max_models}")
    if budget is None:
        budget = float(stats.costs[0])
    if not budget > 0:
        raise MFMCError(f"benchmark budget must be positive, got {budget!r}")

    r2 = stats.rho1**2
    if k > 1 and np.any(r2[1:] >= 1.0):
        i = int(np.flatnonzero(r2[1:] >= 1.0)[0]) + 1
        raise TiedCorrelationError(f"model {stats.names[i]!r} is perfectly correlated with model 0")
    surrogates = sorted(range(1, k), key=lambda i: -r2[i])
    for a, b in zip(surrogates, surrogates[1:]):
        if r2[a] == r2[b]:
            raise TiedCorrelationError(
                f"models {stats.names[a]!r} and {stats.names[b]!r} have equal squared correlation"
            )

    best = [0]
    best_v = float(stats.sigma[0] ** 2 * stats.costs[0] / budget)
    for size in range(1, k):
        for combo in itertools.combinations(range(1, k), size):
            indices = [0] + sorted(combo, key=lambda i: -r2[i])
            if not np.all(cost_ratio_holds(stats.costs[indices], stats.rho1[indices])):
                continue
            v = subset_variance(stats, indices, budget)
            if v < best_v:
                best, best_v = indices, v
    return SelectionResult(
        selected_indices=best,
        predicted_variance=best_v,
        benchmark_budget=float(budget),
        names=[stats.names[i] for i in best],
    )

"""Shared test utilities: random admissible ensembles and published triples."""

from __future__ import annotations

import numpy as np

from mfmc import EnsembleStatistics
from mfmc.allocation import correlation_gaps, cost_ratio_holds
from mfmc.benchmarks.published import (
    BURGERS_REPORTED_SUBSET,
    SHORT_COLUMN_REPORTED_SUBSET,
    published_statistics,
)

TABLE_BUDGETS = (2, 4, 8, 16, 32, 64)

# (m modified, effective modified, m rounded, effective rounded) per budget;
# effective budgets are kept as printed, compared at the printed precision
TABLE1 = {
    2: ((1, 1, 10), "2", (1, 1, 33), "3.15"),
    4: ((1, 1, 50), "4", (1, 1, 66), "4.8"),
    8: ((1, 1, 120), "7.5", (1, 2, 132), "8.6"),
    16: ((1, 4, 258), "15.9", (1, 4, 264), "16.2"),
    32: ((1, 8, 529), "31.45", (1, 8, 529), "31.45"),
    64: ((2, 17, 1059), "63.45", (2, 17, 1059), "63.45"),
}
TABLE2 = {
    2: ((1, 1, 4), "1.93", (1, 1, 10), "3.01"),
    4: ((1, 1, 15), "3.92", (1, 1, 20), "4.82"),
    8: ((1, 2, 36), "7.92", (1, 2, 40), "8.64"),
    16: ((1, 4, 77), "15.7", (1, 5, 81), "16.7"),
    32: ((1, 10, 159), "31.8", (1, 10, 163), "32.5"),
    64: ((1, 20, 325), "63.9", (1, 20, 327), "64.2"),
}


def matches_printed(value: float, printed: str) -> bool:
    """True if ``value`` rounds to ``printed`` at its number of decimals."""
    decimals = len(printed.split(".")[1]) if "." in printed else 0
    return round(value, decimals) == float(printed)


def _triple(benchmark, subset, sigma) -> EnsembleStatistics:
    sub = published_statistics(benchmark).subset(subset)
    if sigma is not None:
        sub = EnsembleStatistics(sigma=sigma, rho1=sub.rho1, costs=sub.costs, names=sub.names)
    return sub


def short_column_triple(sigma=None) -> EnsembleStatistics:
    """Published short-column statistics restricted to (f1, f2, f5)."""
    return _triple("short-column", SHORT_COLUMN_REPORTED_SUBSET, sigma)


def burgers_triple(sigma=None) -> EnsembleStatistics:
    """Published Burgers statistics restricted to (f1, f4, f2)."""
    return _triple("burgers", BURGERS_REPORTED_SUBSET, sigma)


def random_admissible(rng: np.random.Generator, k: int, margin: float = 0.05) -> EnsembleStatistics:
    """Strictly decreasing rho^2 and costs satisfying the ratio condition with slack."""
    while True:
        r2 = np.sort(rng.uniform(0.05, 0.999, size=k - 1))[::-1]
        rho2 = np.concatenate([[1.0], r2])
        if k > 1 and np.min(-np.diff(rho2)) < 1e-4:
            continue
        rho1 = np.sqrt(rho2)
        rho1[1:] *= rng.choice([-1.0, 1.0], size=k - 1)
        gaps = correlation_gaps(rho1)
        w = np.empty(k)
        w[0] = rng.uniform(1.0, 100.0)
        for i in range(1, k):
            w[i] = w[i - 1] * gaps[i] / gaps[i - 1] * rng.uniform(margin, 1.0 - margin)
        sigma = rng.uniform(0.1, 10.0, size=k)
        stats = EnsembleStatistics(sigma=sigma, rho1=rho1, costs=w)
        if k == 1 or np.all(cost_ratio_holds(w, rho1)):
            return stats


def random_ensemble(rng: np.random.Generator, k: int) -> EnsembleStatistics:
    """Arbitrary order, signs and costs; not necessarily admissible."""
    rho1 = np.concatenate([[1.0], rng.uniform(0.3, 0.9999, size=k - 1) * rng.choice([-1.0, 1.0], size=k - 1)])
    costs = np.concatenate([[1.0], 10.0 ** rng.uniform(-4, -0.3, size=k - 1)])
    return EnsembleStatistics(sigma=rng.uniform(0.1, 10.0, size=k), rho1=rho1, costs=costs)

"""Sample allocation for multifidelity Monte Carlo under a fixed budget.

Models are indexed from 0 (the high-fidelity model) to ``k - 1``. Every routine
expects the ensemble in strictly decreasing order of squared correlation with
model 0 and with costs satisfying the cost-ratio condition

    w[i-1] / w[i] > (rho2[i-1] - rho2[i]) / (rho2[i] - rho2[i+1]),   rho2[k] := 0,

which is what :func:`mfmc.selection.select_models` returns.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .ensemble import EnsembleStatistics
from .errors import BudgetError, CostRatioError, MFMCError, OrderingError, TiedCorrelationError

METHODS = ("mc", "modified", "naive-rounded", "exhaustive")


# ---------------------------------------------------------------------------
# Admissibility
# ---------------------------------------------------------------------------


def correlation_gaps(rho1: np.ndarray) -> np.ndarray:
    """``rho1[i]**2 - rho1[i+1]**2`` with ``rho1[k] := 0``."""
    r2 = np.append(np.asarray(rho1, dtype=float) ** 2, 0.0)
    return r2[:-1] - r2[1:]


def cost_ratio_holds(costs: np.ndarray, rho1: np.ndarray) -> np.ndarray:
    """Boolean per consecutive pair ``(i-1, i)``, ``i = 1..k-1``.

    Written in cross-multiplied form so a zero gap does not divide by zero.
    Equality counts as a violation.
    """
    w = np.asarray(costs, dtype=float)
    gaps = correlation_gaps(rho1)
    return w[:-1] * gaps[1:] > w[1:] * gaps[:-1]


def check_admissible(stats: EnsembleStatistics) -> None:
    """Raise unless ``stats`` meets the ordering and cost-ratio preconditions."""
    r2 = stats.rho1**2
    diffs = r2[:-1] - r2[1:]
    if np.any(diffs == 0):
        i = int(np.flatnonzero(diffs == 0)[0])
        raise TiedCorrelationError(
            f"models {stats.names[i]!r} and {stats.names[i + 1]!r} have equal squared correlation"
        )
    if np.any(diffs < 0):
        i = int(np.flatnonzero(diffs < 0)[0])
        raise OrderingError(
            f"models must be ordered by decreasing squared correlation; "
            f"{stats.names[i]!r} precedes {stats.names[i + 1]!r}"
        )
    if stats.k > 1 and r2[-1] == 0:
        raise OrderingError(f"model {stats.names[-1]!r} is uncorrelated with the high-fidelity model")
    ok = cost_ratio_holds(stats.costs, stats.rho1)
    if not np.all(ok):
        i = int(np.flatnonzero(~ok)[0]) + 1
        raise CostRatioError(
            f"cost-ratio condition fails between {stats.names[i - 1]!r} and {stats.names[i]!r}"
        )


# ---------------------------------------------------------------------------
# Containers
# ---------------------------------------------------------------------------


@dataclass
class RelaxedSolution:
    """Real-valued allocation minimizing the MSE with a prefix pinned.

    ``m_real[:pivot_index]`` holds the pinned values, the rest is the
    closed-form minimizer for the residual budget.
    """

    m_real: np.ndarray
    alpha: np.ndarray
    ratios: np.ndarray
    pivot_index: int
    budget: float

    @property
    def m(self) -> np.ndarray:
        return self.m_real


@dataclass
class SamplingPlan:
    m: np.ndarray
    alpha: np.ndarray
    predicted_mse: float
    realized_cost: float
    budget: float
    method: str
    model_ids: list[str] | None = None

    def __post_init__(self):
        self.m = np.asarray(self.m, dtype=np.int64).reshape(-1)
        self.alpha = np.asarray(self.alpha, dtype=float).reshape(-1)
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def k(self) -> int:
        return self.m.size

    def effective_budget(self, w1: float) -> float:
        """Realized cost in units of the high-fidelity cost."""
        return self.realized_cost / w1

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "m": [int(v) for v in self.m],
            "alpha": [float(a) for a in self.alpha],
            "predicted_mse": float(self.predicted_mse),
            "realized_cost": float(self.realized_cost),
            "budget": float(self.budget),
        }
        if self.model_ids is not None:
            d["models"] = list(self.model_ids)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingPlan":
        return cls(
            m=d["m"],
            alpha=d["alpha"],
            predicted_mse=d["predicted_mse"],
            realized_cost=d["realized_cost"],
            budget=d["budget"],
            method=d["method"],
            model_ids=d.get("models"),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "SamplingPlan":
        return cls.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# MSE formulas
# ---------------------------------------------------------------------------


def optimal_weights(stats: EnsembleStatistics) -> np.ndarray:
    """Control-variate weights ``rho1[i] * sigma[0] / sigma[i]`` for ``i >= 1``."""
    return stats.rho1[1:] * stats.sigma[0] / stats.sigma[1:]


def mse(m: Sequence[float], alpha: Sequence[float], stats: EnsembleStatistics) -> float:
    """MSE of the multifidelity estimator for counts ``m`` and weights ``alpha``.

    No ordering or integrality checks; counts must be positive.
    """
    m = np.asarray(m, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    if m.size != stats.k or alpha.size != stats.k - 1:
        raise MFMCError(f"plan has {m.size} counts and {alpha.size} weights for {stats.k} models")
    if np.any(m <= 0):
        raise MFMCError("sample counts must be positive")
    s = stats.sigma
    value = s[0] ** 2 / m[0]
    if stats.k > 1:
        diff = 1.0 / m[:-1] - 1.0 / m[1:]
        term = alpha**2 * s[1:] ** 2 - 2.0 * alpha * s[1:] * s[0] * stats.rho1[1:]
        value += float(np.sum(diff * term))
    return float(value)


def predict_mse(plan, stats: EnsembleStatistics) -> float:
    """MSE predicted for ``plan`` (a :class:`SamplingPlan` or :class:`RelaxedSolution`)."""
    return mse(plan.m, plan.alpha, stats)


def variance_ratio(stats: EnsembleStatistics) -> float:
    """Square root of the relaxed-optimum MSE over the equal-budget MC MSE.

    Values below 1 mean the ensemble beats plain Monte Carlo.
    """
    check_admissible(stats)
    w = stats.costs
    return float(np.sum(np.sqrt(w / w[0] * correlation_gaps(stats.rho1))))


# ---------------------------------------------------------------------------
# Allocation
# ---------------------------------------------------------------------------


def _solve_with_prefix(stats: EnsembleStatistics, budget: float, prefix: Sequence[float]) -> RelaxedSolution:
    w = stats.costs
    k = stats.k
    i = len(prefix)
    if not 0 <= i < k:
        raise MFMCError(f"prefix length must be in [0, {k - 1}], got {i}")
    residual = budget - math.fsum(np.asarray(prefix, dtype=float) * w[:i])
    if not residual > 0:
        raise BudgetError(
            f"budget {budget!r} leaves no residual after the fixed prefix costing {budget - residual!r}"
        )
    gaps = correlation_gaps(stats.rho1)
    r = np.sqrt(w[i] * gaps[i:] / (w[i:] * gaps[i]))
    r[0] = 1.0
    pivot = residual / float(np.dot(w[i:], r))
    m = np.empty(k)
    m[:i] = prefix
    m[i:] = pivot * r
    return RelaxedSolution(
        m_real=m,
        alpha=optimal_weights(stats),
        ratios=m / pivot,
        pivot_index=i,
        budget=float(budget),
    )


def solve_relaxed(stats: EnsembleStatistics, budget: float, fixed_prefix_len: int = 0) -> RelaxedSolution:
    """Closed-form real-valued allocation with the first ``fixed_prefix_len`` counts pinned to 1.

    The free counts are ``m[i:] = m[i] * r`` with
    ``r[j] = sqrt(w[i] * gap[j] / (w[j] * gap[i]))`` and
    ``m[i] = (budget - sum(w[:i])) / sum(w[i:] * r)``, where ``i`` is
    ``fixed_prefix_len`` and ``gap[j] = rho1[j]**2 - rho1[j+1]**2``.
    With ``fixed_prefix_len == 0`` this is the classical relaxed optimum.
    """
    check_admissible(stats)
    return _solve_with_prefix(stats, budget, [1.0] * int(fixed_prefix_len))


def allocate_modified(stats: EnsembleStatistics, budget: float) -> SamplingPlan:
    """Budget-preserving allocation.

    Starts from the relaxed optimum; while some free count is below one, the
    first such count is pinned to one and the remaining counts are re-solved
    for the residual budget. The free counts are then floored.
    """
    check_admissible(stats)
    w = stats.costs
    k = stats.k
    if budget < math.fsum(w):
        raise BudgetError(
            f"budget {budget!r} is below the cost of one evaluation of every model ({math.fsum(w)!r})"
        )
    sol = _solve_with_prefix(stats, budget, [])
    pinned = 0
    while True:
        below = np.flatnonzero(sol.m_real[pinned : k - 1] < 1.0)
        if below.size == 0:
            break
        pinned += int(below[0]) + 1
        sol = _solve_with_prefix(stats, budget, [1.0] * pinned)
    # with budget >= sum(w) the last count cannot drop below one beyond rounding
    assert sol.m_real[-1] > 1.0 - 1e-9

    m = np.ones(k, dtype=np.int64)
    m[pinned:] = np.maximum(np.floor(sol.m_real[pinned:]), 1).astype(np.int64)
    # floor() overshoots only when a count sits on an integer up to rounding error
    while _cost(w, m) > budget:
        j = int(np.flatnonzero(m == m[-1])[0])
        if m[j] <= 1:
            raise BudgetError("no feasible integer allocation")
        m[j] -= 1
    assert np.all(np.diff(m) >= 0) and m[0] >= 1
    return _plan(stats, m, sol.alpha, budget, "modified")


def allocate_naive_rounded(stats: EnsembleStatistics, budget: float) -> SamplingPlan:
    """Relaxed optimum rounded down where at least one, up where below one.

    The realized cost may exceed the budget; it is recorded, not rejected.
    """
    sol = solve_relaxed(stats, budget, 0)
    x = sol.m_real
    m = np.where(x >= 1.0, np.floor(x), np.ceil(x)).astype(np.int64)
    return _plan(stats, m, sol.alpha, budget, "naive-rounded")


def allocate_mc(stats: EnsembleStatistics, budget: float) -> SamplingPlan:
    """Plain Monte Carlo with ``floor(budget / w1)`` high-fidelity samples."""
    n = int(math.floor(budget / stats.costs[0]))
    if n < 1:
        raise BudgetError(f"budget {budget!r} does not cover a single high-fidelity evaluation")
    mc_stats = stats.subset([0])
    return _plan(mc_stats, np.array([n]), np.empty(0), budget, "mc")


def allocate(stats: EnsembleStatistics, budget: float, method: str) -> SamplingPlan:
    if method == "modified":
        return allocate_modified(stats, budget)
    if method == "naive-rounded":
        return allocate_naive_rounded(stats, budget)
    if method == "mc":
        return allocate_mc(stats, budget)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def _cost(w: np.ndarray, m: np.ndarray) -> float:
    return math.fsum(np.asarray(w, dtype=float) * np.asarray(m, dtype=float))


def _plan(stats, m, alpha, budget, method) -> SamplingPlan:
    return SamplingPlan(
        m=m,
        alpha=alpha,
        predicted_mse=mse(m, alpha, stats),
        realized_cost=_cost(stats.costs, m),
        budget=float(budget),
        method=method,
        model_ids=list(stats.names),
    )


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


def pinned_profile(
    stats: EnsembleStatistics, budget: float, index: int, values: Sequence[float]
) -> np.ndarray:
    """MSE as a function of ``m[index]`` with earlier counts pinned to one.

    For each value ``v``, counts before ``index`` are 1, ``m[index] = v`` and
    the counts after it are re-optimized in closed form for the residual
    budget. Values leaving no residual budget give ``inf``.
    """
    check_admissible(stats)
    if not 0 <= index < stats.k - 1:
        raise MFMCError(f"index must be in [0, {stats.k - 2}], got {index}")
    alpha = optimal_weights(stats)
    out = np.empty(len(values))
    for n, v in enumerate(values):
        try:
            sol = _solve_with_prefix(stats, budget, [1.0] * index + [float(v)])
        except BudgetError:
            out[n] = np.inf
            continue
        out[n] = mse(sol.m_real, alpha, stats)
    return out


def brute_force_mip(stats: EnsembleStatistics, budget: float, cap: int) -> SamplingPlan:
    """Exhaustive search over integer allocations.

    Enumerates every ``1 <= m[0] <= ... <= m[k-1] <= cap`` with
    ``sum(w * m) <= budget``, weights fixed to their optimal values, and
    returns the lexicographically first minimizer of the MSE. Only meant for
    tiny instances.
    """
    w = stats.costs
    k = stats.k
    alpha = optimal_weights(stats)
    suffix_min = np.cumsum(w[::-1])[::-1]  # cost of one more sample of every remaining model
    best_m = None
    best_val = math.inf
    m = np.zeros(k, dtype=np.int64)

    def recurse(i: int, lo: int, spent: float) -> None:
        nonlocal best_m, best_val
        if i == k:
            val = mse(m, alpha, stats)
            if val < best_val:
                best_val = val
                best_m = m.copy()
            return
        for v in range(lo, cap + 1):
            # the remaining models need at least v samples each
            if spent + v * suffix_min[i] > budget * (1 + 1e-12):
                break
            m[i] = v
            recurse(i + 1, v, spent + v * w[i])

    recurse(0, 1, 0.0)
    if best_m is None:
        raise BudgetError(f"no integer allocation with counts <= {cap} fits budget {budget!r}")
    return SamplingPlan(
        m=best_m,
        alpha=alpha,
        predicted_mse=best_val,
        realized_cost=_cost(w, best_m),
        budget=float(budget),
        method="exhaustive",
        model_ids=list(stats.names),
    )

"""Monte Carlo and multifidelity estimators, and repeated-run experiments."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .allocation import SamplingPlan, allocate
from .ensemble import EnsembleStatistics, Model, RandomInputSpec
from .errors import MFMCError
from .rng import SeedLike, as_generator, seed_sequence

# substream keys: (STREAM_RUNS, method id, budget index, run) and (STREAM_REFERENCE,)
STREAM_REFERENCE = 0
STREAM_RUNS = 1
METHOD_IDS = {"mc": 0, "modified": 1, "naive-rounded": 2}

REFERENCE_CHUNK = 1_000_000


@dataclass
class MFMCEstimate:
    value: float
    counts: np.ndarray
    realized_cost: float


def mfmc_estimate(
    models: Sequence[Model],
    plan: SamplingPlan,
    input_spec: RandomInputSpec,
    seed: SeedLike,
) -> MFMCEstimate:
    """One multifidelity estimate following ``plan``.

    Draws ``m[-1]`` realizations and evaluates model ``i`` on the first
    ``m[i]`` of them, so the correction for model ``i`` compares means over
    nested prefixes of the same samples::

        y = mean(f0[:m0]) + sum_i alpha[i] * (mean(fi[:m_i]) - mean(fi[:m_{i-1}]))
    """
    m = plan.m
    if len(models) != m.size:
        raise MFMCError(f"plan has {m.size} counts but {len(models)} models were given")
    if plan.model_ids is not None and list(plan.model_ids) != [md.id for md in models]:
        raise MFMCError(f"plan is for models {plan.model_ids}, got {[md.id for md in models]}")
    if m[0] < 1 or np.any(np.diff(m) < 0):
        raise MFMCError(f"plan counts must be nondecreasing and start at >= 1, got {m.tolist()}")
    z = input_spec.sample(int(m[-1]), seed)
    y0 = models[0].evaluate(z[: m[0]])
    value = float(np.mean(y0))
    for i in range(1, m.size):
        yi = models[i].evaluate(z[: m[i]])
        value += float(plan.alpha[i - 1]) * (float(np.mean(yi)) - float(np.mean(yi[: m[i - 1]])))
    cost = math.fsum(md.cost * int(n) for md, n in zip(models, m))
    return MFMCEstimate(value=value, counts=m.copy(), realized_cost=cost)


def mc_estimate(model: Model, n: int, input_spec: RandomInputSpec, seed: SeedLike) -> float:
    """Sample mean of ``n`` i.i.d. evaluations."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    z = input_spec.sample(int(n), seed)
    return float(np.mean(model.evaluate(z)))


def reference_value(
    model: Model,
    input_spec: RandomInputSpec,
    n: int,
    seed: SeedLike,
    chunk: int = REFERENCE_CHUNK,
) -> tuple[float, float]:
    """Large-sample mean of ``model`` and its standard error, computed in chunks."""
    rng = as_generator(seed)
    total = 0.0
    total_sq = 0.0
    done = 0
    shift = None
    while done < n:
        size = min(chunk, n - done)
        y = model.evaluate(input_spec.sample(size, rng))
        if shift is None:
            shift = float(y[0])
        d = y - shift
        total += math.fsum(d)
        total_sq += math.fsum(d * d)
        done += size
    mean_d = total / n
    var = (total_sq - n * mean_d**2) / (n - 1) if n > 1 else 0.0
    return shift + mean_d, math.sqrt(max(var, 0.0) / n)


@dataclass
class EstimateReport:
    """Outcome of ``N`` independent runs of one method at one budget."""

    budget: float
    budget_index: int
    method: str
    reference: float
    plan: SamplingPlan | None = None
    per_run_estimates: np.ndarray = field(default_factory=lambda: np.empty(0))
    status: str = "ok"
    message: str = ""
    seed_keys: list[tuple[int, ...]] = field(default_factory=list)

    @property
    def n_runs(self) -> int:
        return self.per_run_estimates.size

    @property
    def estimate_mean(self) -> float:
        return float(np.mean(self.per_run_estimates)) if self.n_runs else math.nan

    @property
    def empirical_mse(self) -> float:
        if not self.n_runs:
            return math.nan
        return float(np.mean((self.per_run_estimates - self.reference) ** 2))

    @property
    def relative_mse(self) -> float:
        return self.empirical_mse / self.reference**2

    @property
    def realized_cost_per_run(self) -> float:
        return self.plan.realized_cost if self.plan is not None else math.nan

    def to_dict(self) -> dict:
        return {
            "budget": self.budget,
            "budget_index": self.budget_index,
            "method": self.method,
            "status": self.status,
            "message": self.message,
            "plan": None if self.plan is None else self.plan.to_dict(),
            "reference": self.reference,
            "estimate_mean": self.estimate_mean,
            "empirical_mse": self.empirical_mse,
            "relative_mse": self.relative_mse,
            "realized_cost_per_run": self.realized_cost_per_run,
            "per_run_estimates": [float(v) for v in self.per_run_estimates],
            "seed_keys": [list(k) for k in self.seed_keys],
        }


@dataclass
class ExperimentResult:
    reference: float
    reference_stderr: float
    reference_samples: int
    seed: int
    reports: list[EstimateReport]

    @property
    def complete(self) -> bool:
        return all(r.status == "ok" for r in self.reports)

    def report(self, budget_index: int, method: str) -> EstimateReport:
        for r in self.reports:
            if r.budget_index == budget_index and r.method == method:
                return r
        raise KeyError((budget_index, method))


def run_experiment(
    models: Sequence[Model],
    stats: EnsembleStatistics,
    input_spec: RandomInputSpec,
    budgets: Sequence[float],
    n_runs: int,
    reference_samples: int,
    seed: int,
    methods: Sequence[str] = ("mc", "modified", "naive-rounded"),
    reference: float | None = None,
    max_workers: int | None = None,
    reference_chunk: int = REFERENCE_CHUNK,
) -> ExperimentResult:
    """Repeat each method ``n_runs`` times at every budget and compare to a reference.

    ``models`` and ``stats`` describe the selected ensemble in allocation order
    (model 0 first). The reference mean of model 0 uses its own substream; run
    ``j`` of ``method`` at budget ``b`` uses substream
    ``(STREAM_RUNS, METHOD_IDS[method], b, j)``. Budgets that a method cannot
    serve produce rows with ``status="infeasible"`` instead of raising.
    """
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    if len(models) != stats.k:
        raise MFMCError(f"{len(models)} models for statistics of {stats.k} models")
    for md, name in zip(models, stats.names):
        if md.id != name:
            raise MFMCError(f"model order {[m.id for m in models]} does not match statistics {stats.names}")
    if reference is None:
        y_ref, ref_se = reference_value(
            models[0], input_spec, reference_samples, seed_sequence(seed, STREAM_REFERENCE), reference_chunk
        )
    else:
        y_ref, ref_se, reference_samples = float(reference), math.nan, 0

    jobs = [(b_idx, float(p), method) for b_idx, p in enumerate(budgets) for method in methods]

    def run_row(job) -> EstimateReport:
        b_idx, p, method = job
        report = EstimateReport(budget=p, budget_index=b_idx, method=method, reference=y_ref)
        try:
            plan = allocate(stats, p, method)
        except MFMCError as exc:
            report.status = "infeasible"
            report.message = str(exc)
            return report
        report.plan = plan
        keys = [(STREAM_RUNS, METHOD_IDS[method], b_idx, j) for j in range(n_runs)]
        values = np.empty(n_runs)
        if method == "mc":
            for j, key in enumerate(keys):
                values[j] = mc_estimate(models[0], int(plan.m[0]), input_spec, seed_sequence(seed, *key))
        else:
            for j, key in enumerate(keys):
                values[j] = mfmc_estimate(models, plan, input_spec, seed_sequence(seed, *key)).value
        report.per_run_estimates = values
        report.seed_keys = keys
        return report

    if max_workers is not None and max_workers > 1 and all(m.thread_safe for m in models):
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            reports = list(pool.map(run_row, jobs))
    else:
        reports = [run_row(job) for job in jobs]
    reports.sort(key=lambda r: (r.budget_index, methods.index(r.method)))
    return ExperimentResult(
        reference=y_ref,
        reference_stderr=ref_se,
        reference_samples=reference_samples,
        seed=int(seed),
        reports=reports,
    )

"""Random inputs, models, pilot sampling and ensemble statistics."""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import (
    DegenerateModelError,
    MFMCError,
    ModelEvaluationError,
    NonFiniteOutputError,
)
from .rng import SeedLike, as_generator

# ---------------------------------------------------------------------------
# Random inputs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    low: float
    high: float

    def __post_init__(self):
        if not self.low < self.high:
            raise ValueError(f"uniform bounds must satisfy low < high, got [{self.low}, {self.high}]")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.low, self.high, size=n)

    def to_dict(self) -> dict:
        return {"kind": "uniform", "low": self.low, "high": self.high}


@dataclass(frozen=True)
class Normal:
    mean: float
    std: float

    def __post_init__(self):
        if not self.std > 0:
            raise ValueError(f"normal std must be positive, got {self.std}")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(self.mean, self.std, size=n)

    def to_dict(self) -> dict:
        return {"kind": "normal", "mean": self.mean, "std": self.std}


LOGNORMAL_CONVENTIONS = ("underlying", "moments")


@dataclass(frozen=True)
class LogNormal:
    """Log-normal variable.

    With ``convention="underlying"`` (default) ``mean`` and ``std`` describe
    the normal variable ``log(Z)``. With ``convention="moments"`` they are the
    mean and standard deviation of ``Z`` itself.
    """

    mean: float
    std: float
    convention: str = "underlying"

    def __post_init__(self):
        if not self.std > 0:
            raise ValueError(f"lognormal std must be positive, got {self.std}")
        if self.convention not in LOGNORMAL_CONVENTIONS:
            raise ValueError(f"unknown lognormal convention {self.convention!r}")
        if self.convention == "moments" and not self.mean > 0:
            raise ValueError("lognormal mean must be positive under the moments convention")

    @property
    def log_params(self) -> tuple[float, float]:
        """Mean and standard deviation of ``log(Z)``."""
        if self.convention == "underlying":
            return self.mean, self.std
        s2 = math.log1p((self.std / self.mean) ** 2)
        return math.log(self.mean) - 0.5 * s2, math.sqrt(s2)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        mu, sigma = self.log_params
        return rng.lognormal(mu, sigma, size=n)

    def to_dict(self) -> dict:
        return {"kind": "lognormal", "mean": self.mean, "std": self.std, "convention": self.convention}


Distribution = Uniform | Normal | LogNormal


def distribution_from_dict(d: dict) -> Distribution:
    kind = d.get("kind")
    if kind == "uniform":
        return Uniform(float(d["low"]), float(d["high"]))
    if kind == "normal":
        return Normal(float(d["mean"]), float(d["std"]))
    if kind == "lognormal":
        return LogNormal(float(d["mean"]), float(d["std"]), d.get("convention", "underlying"))
    raise ValueError(f"unknown distribution kind {kind!r}")


@dataclass(frozen=True)
class RandomInputSpec:
    """Independent coordinates of the random input vector."""

    coordinates: tuple[Distribution, ...]

    def __post_init__(self):
        object.__setattr__(self, "coordinates", tuple(self.coordinates))
        if len(self.coordinates) < 1:
            raise ValueError("a random input needs at least one coordinate")

    @property
    def dimension(self) -> int:
        return len(self.coordinates)

    def sample(self, n: int, seed: SeedLike) -> np.ndarray:
        """Draw ``n`` i.i.d. realizations as an ``(n, dimension)`` array.

        Coordinates are drawn one after another from the same generator, so the
        result only depends on the seed and ``n``.
        """
        rng = as_generator(seed)
        out = np.empty((int(n), self.dimension))
        for j, dist in enumerate(self.coordinates):
            out[:, j] = dist.sample(rng, int(n))
        return out

    def to_dict(self) -> dict:
        return {"coordinates": [c.to_dict() for c in self.coordinates]}

    @classmethod
    def from_dict(cls, d: dict) -> "RandomInputSpec":
        return cls(tuple(distribution_from_dict(c) for c in d["coordinates"]))


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


@dataclass
class Model:
    """A scalar quantity of interest with a nominal evaluation cost.

    ``evaluator`` is vectorized over rows: it maps an ``(n, dim)`` array of
    input realizations to ``n`` outputs, and must return the same outputs for
    the same inputs. Set ``thread_safe=False`` if it keeps mutable state.
    """

    id: str
    evaluator: Callable[[np.ndarray], np.ndarray]
    cost: float
    thread_safe: bool = True

    def __post_init__(self):
        if not self.cost > 0:
            raise ValueError(f"model {self.id!r}: cost must be positive, got {self.cost}")

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        """Evaluate on a batch of inputs, wrapping failures with the sample index."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        try:
            y = np.asarray(self.evaluator(z), dtype=float).reshape(-1)
        except Exception as exc:
            raise ModelEvaluationError(self.id, _first_failing_row(self.evaluator, z), exc) from exc
        if y.shape[0] != z.shape[0]:
            raise ModelEvaluationError(
                self.id, None, ValueError(f"expected {z.shape[0]} outputs, got {y.shape[0]}")
            )
        bad = np.flatnonzero(~np.isfinite(y))
        if bad.size:
            raise NonFiniteOutputError(self.id, int(bad[0]), float(y[bad[0]]))
        return y

    def __call__(self, z: np.ndarray) -> float:
        """Evaluate a single input vector."""
        return float(self.evaluate(np.asarray(z, dtype=float).reshape(1, -1))[0])


def _first_failing_row(evaluator, z: np.ndarray) -> int | None:
    for i in range(z.shape[0]):
        try:
            evaluator(z[i : i + 1])
        except Exception:
            return i
    return None


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


@dataclass
class EnsembleStatistics:
    """Per-model standard deviations, correlations with model 0, and costs."""

    sigma: np.ndarray
    rho1: np.ndarray
    costs: np.ndarray
    pilot_count: int = 0
    names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=float).reshape(-1)
        self.rho1 = np.asarray(self.rho1, dtype=float).reshape(-1)
        self.costs = np.asarray(self.costs, dtype=float).reshape(-1)
        k = self.sigma.size
        if k == 0:
            raise MFMCError("ensemble statistics need at least one model")
        if self.rho1.size != k or self.costs.size != k:
            raise MFMCError(
                f"sigma, rho1 and costs must have equal length, got {k}, {self.rho1.size}, {self.costs.size}"
            )
        if not self.names:
            self.names = [f"f{i + 1}" for i in range(k)]
        self.names = [str(n) for n in self.names]
        if len(self.names) != k:
            raise MFMCError(f"expected {k} model names, got {len(self.names)}")
        if self.rho1[0] != 1.0:
            raise MFMCError(f"rho1[0] must be exactly 1, got {self.rho1[0]!r}")
        if np.any(np.abs(self.rho1) > 1.0):
            raise MFMCError("correlations must lie in [-1, 1]")
        if not np.all(self.sigma > 0):
            raise MFMCError("all standard deviations must be positive")
        if not np.all(self.costs > 0):
            raise MFMCError("all costs must be positive")

    @property
    def k(self) -> int:
        return self.sigma.size

    def subset(self, indices: Sequence[int]) -> "EnsembleStatistics":
        """Statistics of the models at ``indices``, in that order.

        ``indices[0]`` must be 0: correlations are relative to model 0.
        """
        idx = [int(i) for i in indices]
        if not idx or idx[0] != 0:
            raise MFMCError("a subset must start with the high-fidelity model (index 0)")
        return EnsembleStatistics(
            sigma=self.sigma[idx],
            rho1=self.rho1[idx],
            costs=self.costs[idx],
            pilot_count=self.pilot_count,
            names=[self.names[i] for i in idx],
        )

    def to_dict(self) -> dict:
        return {
            "names": list(self.names),
            "sigma": self.sigma.tolist(),
            "rho1": self.rho1.tolist(),
            "costs": self.costs.tolist(),
            "pilot_count": int(self.pilot_count),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleStatistics":
        return cls(
            sigma=d["sigma"],
            rho1=d["rho1"],
            costs=d["costs"],
            pilot_count=int(d.get("pilot_count", 0)),
            names=list(d.get("names", [])),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "EnsembleStatistics":
        return cls.from_dict(json.loads(Path(path).read_text()))


def draw_pilot(
    models: Sequence[Model],
    input_spec: RandomInputSpec,
    n_pilot: int,
    seed: SeedLike,
    max_workers: int | None = None,
) -> np.ndarray:
    """Evaluate every model on the same ``n_pilot`` input realizations.

    Returns an ``(n_pilot, k)`` matrix whose column ``i`` holds model ``i``.
    Columns may be computed in parallel when every model is thread safe; the
    result does not depend on scheduling.
    """
    if n_pilot < 2:
        raise ValueError(f"n_pilot must be at least 2, got {n_pilot}")
    if not models:
        raise ValueError("no models given")
    z = input_spec.sample(n_pilot, seed)
    out = np.empty((n_pilot, len(models)))
    parallel = max_workers is not None and max_workers > 1 and all(m.thread_safe for m in models)
    if parallel:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            columns = list(pool.map(lambda m: m.evaluate(z), models))
    else:
        columns = [m.evaluate(z) for m in models]
    for i, col in enumerate(columns):
        out[:, i] = col
    return out


def estimate_statistics(
    pilot: np.ndarray,
    costs: Sequence[float],
    names: Sequence[str] | None = None,
) -> EnsembleStatistics:
    """Sample standard deviations (divisor n-1) and correlations with column 0."""
    pilot = np.asarray(pilot, dtype=float)
    if pilot.ndim != 2 or pilot.shape[0] < 2:
        raise ValueError("pilot matrix must be 2-D with at least two rows")
    if not np.all(np.isfinite(pilot)):
        raise ValueError("pilot matrix contains non-finite entries")
    n, k = pilot.shape
    centered = pilot - pilot.mean(axis=0)
    ss = np.einsum("ij,ij->j", centered, centered)
    for i in range(k):
        if ss[i] == 0.0:
            raise DegenerateModelError(i, None if names is None else names[i])
    sigma = np.sqrt(ss / (n - 1))
    cross = centered[:, 0] @ centered
    rho1 = np.clip(cross / np.sqrt(ss[0] * ss), -1.0, 1.0)
    rho1[0] = 1.0
    return EnsembleStatistics(
        sigma=sigma,
        rho1=rho1,
        costs=np.asarray(costs, dtype=float),
        pilot_count=n,
        names=list(names) if names is not None else [],
    )


def write_pilot_csv(path: str | Path, pilot: np.ndarray, model_ids: Sequence[str]) -> None:
    pilot = np.asarray(pilot, dtype=float)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(model_ids))
        for row in pilot:
            writer.writerow([repr(float(v)) for v in row])


def read_pilot_csv(path: str | Path) -> tuple[np.ndarray, list[str]]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    return np.asarray(rows, dtype=float).reshape(-1, len(header)), header


def measure_costs(
    models: Sequence[Model],
    input_spec: RandomInputSpec,
    n: int = 100,
    seed: SeedLike = 0,
    repeats: int = 3,
) -> np.ndarray:
    """Wall-clock seconds per evaluation, best of ``repeats`` batched runs.

    Machine dependent and informational only; allocation uses nominal costs.
    """
    if n < 1 or repeats < 1:
        raise ValueError("n and repeats must be positive")
    z = input_spec.sample(n, seed)
    out = np.empty(len(models))
    for i, m in enumerate(models):
        best = math.inf
        for _ in range(repeats):
            start = time.perf_counter()
            m.evaluate(z)
            best = min(best, time.perf_counter() - start)
        out[i] = best / n
    return out

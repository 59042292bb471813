"""Experiment configuration (JSON).

Schema (all keys optional except ``benchmark``)::

    {
      "benchmark": "short-column" | "burgers" | "custom-stats",
      "stats_source": "pilot" | "paper",
      "pilot_size": 1000,
      "budgets": [2, 4, 8, 16, 32, 64],        # multiples of the high-fidelity cost
      "n_runs": 1000,
      "reference_size": 10000000,
      "seed": 0,
      "output_dir": "results",                 # $MFMC_OUTPUT_DIR overrides
      "lognormal_convention": "underlying" | "moments",
      "z2_range": [0.0002, 0.002],
      "training_samples": 50,
      "methods": ["mc", "modified", "naive-rounded"],
      "models": ["f1", "f4", "f2"] | null,     # skip selection, use this subset
      "stats": {"sigma": [...], "rho1": [...], "costs": [...], "names": [...]} | null,
      "emit_plot_data": false,
      "max_workers": null
    }

``custom-stats`` takes its statistics from ``stats`` and has no models, so it
supports selection and allocation but not sampling.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .errors import ConfigError

BENCHMARKS = ("short-column", "burgers", "custom-stats")
STATS_SOURCES = ("pilot", "paper")
ALL_METHODS = ("mc", "modified", "naive-rounded")
OUTPUT_DIR_ENV = "MFMC_OUTPUT_DIR"

# substream keys under the master seed (the experiment runner uses 0 and 1)
PILOT_STREAM = 10
TRAINING_STREAM = 11


@dataclass
class ExperimentConfig:
    benchmark: str
    stats_source: str = "pilot"
    pilot_size: int = 1000
    budgets: list[float] = field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0, 32.0, 64.0])
    n_runs: int = 1000
    reference_size: int = 10_000_000
    seed: int = 0
    output_dir: str = "results"
    lognormal_convention: str = "underlying"
    z2_range: list[float] = field(default_factory=lambda: [2e-4, 2e-3])
    training_samples: int = 50
    methods: list[str] = field(default_factory=lambda: list(ALL_METHODS))
    models: list[str] | None = None
    stats: dict | None = None
    emit_plot_data: bool = False
    max_workers: int | None = None

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.benchmark not in BENCHMARKS:
            raise ConfigError(f"must be one of {BENCHMARKS}, got {self.benchmark!r}", "benchmark")
        if self.stats_source not in STATS_SOURCES:
            raise ConfigError(f"must be one of {STATS_SOURCES}, got {self.stats_source!r}", "stats_source")
        if not self.budgets or any(not b > 0 for b in self.budgets):
            raise ConfigError("budgets must be a non-empty list of positive numbers", "budgets")
        self.budgets = [float(b) for b in self.budgets]
        self.z2_range = [float(z) for z in self.z2_range]
        if self.n_runs < 1:
            raise ConfigError("must be at least 1", "n_runs")
        if self.reference_size < 1:
            raise ConfigError("must be at least 1", "reference_size")
        if self.pilot_size < 2:
            raise ConfigError("must be at least 2", "pilot_size")
        if self.training_samples < 1:
            raise ConfigError("must be at least 1", "training_samples")
        if self.lognormal_convention not in ("underlying", "moments"):
            raise ConfigError("must be 'underlying' or 'moments'", "lognormal_convention")
        if len(self.z2_range) != 2 or not self.z2_range[0] < self.z2_range[1]:
            raise ConfigError("must be [low, high] with low < high", "z2_range")
        bad = [m for m in self.methods if m not in ALL_METHODS]
        if bad or not self.methods:
            raise ConfigError(f"unknown methods {bad}; choose from {ALL_METHODS}", "methods")
        if self.benchmark == "custom-stats" and self.stats is None:
            raise ConfigError("custom-stats needs a 'stats' block", "stats")
        if self.models is not None and (not self.models or self.models[0] != "f1"):
            raise ConfigError("an explicit subset must start with 'f1'", "models")

    @property
    def resolved_output_dir(self) -> Path:
        return Path(os.environ.get(OUTPUT_DIR_ENV) or self.output_dir)

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("top level must be a JSON object")
        known = {f.name: f for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError("unknown field", key)
        if "benchmark" not in data:
            raise ConfigError("missing required field", "benchmark")
        kwargs = {}
        for key, value in data.items():
            kwargs[key] = _coerce(key, value)
        return cls(**kwargs)

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{exc.msg} (column {exc.colno})", line=exc.lineno) from exc
        try:
            return cls.from_dict(data)
        except ConfigError as exc:
            if exc.field is not None and exc.line is None:
                line = _line_of_key(text, exc.field)
                if line is not None:
                    raise ConfigError(exc.message, exc.field, line) from None
            raise

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.loads(Path(path).read_text())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps())


_INT_FIELDS = {"pilot_size", "n_runs", "reference_size", "seed", "training_samples"}
_FLOAT_LIST_FIELDS = {"budgets", "z2_range"}
_STR_FIELDS = {"benchmark", "stats_source", "output_dir", "lognormal_convention"}


def _coerce(key: str, value):
    if key in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"expected an integer, got {value!r}", key)
        return value
    if key in _FLOAT_LIST_FIELDS:
        if not isinstance(value, list) or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in value):
            raise ConfigError(f"expected a list of numbers, got {value!r}", key)
        return [float(v) for v in value]
    if key in _STR_FIELDS:
        if not isinstance(value, str):
            raise ConfigError(f"expected a string, got {value!r}", key)
        return value
    if key in ("methods", "models"):
        if value is None and key == "models":
            return None
        if not isinstance(value, list) or any(not isinstance(v, str) for v in value):
            raise ConfigError(f"expected a list of strings, got {value!r}", key)
        return list(value)
    if key == "emit_plot_data":
        if not isinstance(value, bool):
            raise ConfigError(f"expected true or false, got {value!r}", key)
        return value
    if key == "max_workers":
        if value is not None and (isinstance(value, bool) or not isinstance(value, int) or value < 1):
            raise ConfigError(f"expected a positive integer or null, got {value!r}", key)
        return value
    if key == "stats":
        if value is not None and not isinstance(value, dict):
            raise ConfigError("expected an object with sigma, rho1 and costs", key)
        return value
    return value


def _line_of_key(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for n, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return n
    return None


PRESETS = {
    "short-column": dict(
        benchmark="short-column",
        stats_source="pilot",
        pilot_size=1000,
        budgets=[2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
        n_runs=1000,
        reference_size=10_000_000,
    ),
    "short-column-paper": dict(
        benchmark="short-column",
        stats_source="paper",
        pilot_size=1000,
        budgets=[2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
        n_runs=1000,
        reference_size=10_000_000,
    ),
    "burgers-paper": dict(
        benchmark="burgers",
        stats_source="paper",
        pilot_size=100,
        budgets=[2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
        n_runs=100,
        reference_size=100_000,
        models=["f1", "f4", "f2"],
    ),
    "burgers": dict(
        benchmark="burgers",
        stats_source="pilot",
        pilot_size=100,
        budgets=[2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
        n_runs=100,
        reference_size=100_000,
    ),
}


def preset(name: str, **overrides) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return ExperimentConfig(**{**PRESETS[name], **overrides})

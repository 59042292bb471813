"""Exception hierarchy for the mfmc package."""

from __future__ import annotations


class MFMCError(Exception):
    """Base class for all errors raised by this package."""


class ModelEvaluationError(MFMCError):
    """A model raised while being evaluated on a sample."""

    def __init__(self, model_id: str, sample_index: int | None, cause: BaseException):
        self.model_id = model_id
        self.sample_index = sample_index
        self.cause = cause
        where = "" if sample_index is None else f" at sample {sample_index}"
        super().__init__(f"model {model_id!r} failed{where}: {cause!r}")


class NonFiniteOutputError(MFMCError):
    """A model produced NaN or inf."""

    def __init__(self, model_id: str, sample_index: int, value: float):
        self.model_id = model_id
        self.sample_index = sample_index
        self.value = value
        super().__init__(
            f"model {model_id!r} returned non-finite value {value!r} at sample {sample_index}"
        )


class DegenerateModelError(MFMCError):
    """A model has zero sample variance, so its correlation is undefined."""

    def __init__(self, model_index: int, model_id: str | None = None):
        self.model_index = model_index
        self.model_id = model_id
        label = model_id if model_id is not None else f"#{model_index}"
        super().__init__(f"model {label} has zero variance; correlation is undefined")


class OrderingError(MFMCError):
    """Models are not in strictly decreasing order of squared correlation."""


class TiedCorrelationError(OrderingError):
    """Two models share the same squared correlation with the high-fidelity model."""


class CostRatioError(MFMCError):
    """The cost-ratio condition required by the closed-form allocation fails."""


class BudgetError(MFMCError):
    """The budget is too small for the requested allocation."""


class TooManyModelsError(MFMCError):
    """Exhaustive subset search was requested for too many models."""


class RankDeficiencyError(MFMCError):
    """The snapshot matrix has lower numerical rank than the requested basis size."""


class ConfigError(MFMCError):
    """An experiment configuration could not be parsed or validated."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.message = message
        self.field = field
        self.line = line
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if field is not None:
            parts.append(f"field {field!r}")
        prefix = ", ".join(parts)
        super().__init__(f"{prefix}: {message}" if prefix else message)

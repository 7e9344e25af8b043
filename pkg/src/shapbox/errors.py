"""Exception hierarchy shared across the explainer, adapters, CLI, and service."""


class ShapboxError(Exception):
    """Base class for all shapbox errors."""


class ShapeMismatchError(ShapboxError):
    """Inputs disagree on feature count or row layout."""


class ConfigError(ShapboxError):
    """Invalid explainer or service configuration (bad budget, bad flags, ...)."""


class NumericError(ShapboxError):
    """A computation produced or received a non-finite number."""


class ModelContractError(ShapboxError):
    """A model broke the batch-prediction contract (wrong output length, NaN, ...)."""


class UnsupportedModelError(ShapboxError):
    """Model document declares a type we do not implement."""


class ModelValidationError(ShapboxError):
    """Model document is structurally invalid (missing fields, dangling children)."""


class SubprocessAdapterError(ModelContractError):
    """Subprocess model misbehaved: timeout, broken pipe, id mismatch, bad payload."""


class CostGuardError(ShapboxError):
    """Exact computation refused because the feature count is too large."""


class DatasetError(ShapboxError):
    """Dataset could not be ingested (empty, ragged rows, bad sidecar)."""

"""shapbox: model-agnostic per-feature attribution for black-box predictors."""

from .core import (
    Coalition,
    ExplainerConfig,
    Explanation,
    WeightedSample,
    aggregate_outputs,
    auto_budget,
    build_masked_rows,
    explain,
    find_varying_features,
    kernel_weight,
    sample_coalitions,
    solve_weighted_regression,
)
from .data import TabularDataset, load_dataset, summarize_background
from .exact import exact_shapley
from .models import LinearModel, TreeEnsembleModel, load_model, predict_batch
from .service import create_app
from .subprocess_model import SubprocessModel, encode_request

__version__ = "0.1.0"

__all__ = [
    "Coalition",
    "ExplainerConfig",
    "Explanation",
    "LinearModel",
    "SubprocessModel",
    "TabularDataset",
    "TreeEnsembleModel",
    "WeightedSample",
    "aggregate_outputs",
    "auto_budget",
    "build_masked_rows",
    "create_app",
    "encode_request",
    "exact_shapley",
    "explain",
    "find_varying_features",
    "kernel_weight",
    "load_dataset",
    "load_model",
    "predict_batch",
    "sample_coalitions",
    "solve_weighted_regression",
    "summarize_background",
]

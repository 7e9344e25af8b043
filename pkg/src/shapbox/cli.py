"""Command-line interface: explain, serve, bench.

Exit codes: 0 success, 2 validation/configuration error, 3 model error,
4 port already in use (serve).
"""

from __future__ import annotations

import json
import logging
import os
import socket
import sys
import time
from pathlib import Path

import click
import numpy as np

from .core import ExplainerConfig, explain, find_varying_features
from .data import load_dataset, summarize_background
from .errors import (
    ConfigError,
    CostGuardError,
    DatasetError,
    ModelContractError,
    ModelValidationError,
    NumericError,
    ShapeMismatchError,
    SubprocessAdapterError,
    UnsupportedModelError,
)
from .models import LinearModel, TreeEnsembleModel, load_model, predict_batch

_VALIDATION_ERRORS = (
    ConfigError,
    ShapeMismatchError,
    DatasetError,
    ModelValidationError,
    UnsupportedModelError,
    CostGuardError,
    ValueError,
)
_MODEL_ERRORS = (ModelContractError, NumericError, SubprocessAdapterError)


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _parse_background_mode(spec: str):
    if spec in ("median", "all"):
        return spec, 1, 0
    if spec.startswith("sample:"):
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError(f"expected sample:k:seed, got {spec!r}")
        try:
            return "sample", int(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"expected integer k and seed in {spec!r}") from None
    raise ConfigError(f"unknown background mode {spec!r}")


def _load_engine(model_path: str, background_path: str, background_mode: str):
    model = load_model(model_path)
    dataset = load_dataset(background_path)
    mode, k, seed = _parse_background_mode(background_mode)
    background = summarize_background(dataset, mode, k=k, seed=seed)
    if model.n_features is not None and background.shape[1] != model.n_features:
        raise ShapeMismatchError(
            f"background width {background.shape[1]} != model width {model.n_features}"
        )
    return model, dataset, background, mode


def _parse_instance(value: str) -> np.ndarray:
    text = value
    if value.startswith("@"):
        text = Path(value[1:]).read_text(encoding="utf-8")
    try:
        parsed = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"instance is not valid JSON: {exc}") from None
    arr = np.asarray(parsed, dtype=float)
    if arr.ndim != 1:
        raise ConfigError(f"instance must be a flat JSON array, got shape {arr.shape}")
    return arr


def _parse_samples(value: str):
    if value == "auto":
        return None
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"--samples must be an integer or 'auto', got {value!r}") from None


def _model_type(model) -> str:
    if isinstance(model, LinearModel):
        return "linear"
    if isinstance(model, TreeEnsembleModel):
        return "gbdt"
    return type(model).__name__


@click.group()
def main():
    """Model-agnostic per-feature attribution for black-box predictors."""
    level = os.environ.get("SHAPBOX_LOG", "").lower()
    if level in ("debug", "info"):
        logging.basicConfig(
            level=logging.DEBUG if level == "debug" else logging.INFO,
            format="%(asctime)s %(name)s %(levelname)s %(message)s",
        )


@main.command("explain")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--background", "background_path", required=True, type=click.Path(exists=True))
@click.option("--background-mode", default="all", show_default=True,
              help="median | sample:k:seed | all")
@click.option("--instance", required=True, help="JSON array, or @FILE containing one")
@click.option("--samples", default="auto", show_default=True, help="coalition budget or 'auto'")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--format", "output_format", default="json", show_default=True,
              type=click.Choice(["json", "csv"]))
@click.option("--plot", "plot_path", default=None, type=click.Path(),
              help="also render the attribution bar chart to this file")
def cli_explain(model_path, background_path, background_mode, instance, samples,
                seed, output_format, plot_path):
    """Explain one prediction and print the attribution document."""
    try:
        model, dataset, background, _ = _load_engine(
            model_path, background_path, background_mode
        )
        x = _parse_instance(instance)
        cfg = ExplainerConfig(n_samples=_parse_samples(samples), seed=seed)

        start = time.perf_counter()
        result = explain(model, x, background, cfg)
        prediction = float(predict_batch(model, x[None, :])[0])
        elapsed_ms = (time.perf_counter() - start) * 1000.0
    except _MODEL_ERRORS as exc:
        _fail(3, str(exc))
    except _VALIDATION_ERRORS as exc:
        _fail(2, str(exc))

    response = {
        "prediction": prediction,
        "base_value": result.base_value,
        "phi": [float(v) for v in result.phi],
        "feature_names": dataset.feature_names,
        "samples_used": result.samples_used,
        "elapsed_ms": elapsed_ms,
    }
    if output_format == "json":
        click.echo(json.dumps(response))
    else:
        lines = ["name,value"]
        lines.append(f"prediction,{prediction!r}")
        lines.append(f"base_value,{result.base_value!r}")
        lines.append(f"samples_used,{result.samples_used}")
        for name, value in zip(dataset.feature_names, result.phi):
            lines.append(f"{name},{float(value)!r}")
        click.echo("\n".join(lines))

    if plot_path is not None:
        from .plots import save_attribution_chart

        save_attribution_chart(
            dataset.feature_names, result.phi, result.base_value, prediction, plot_path
        )


@main.command("serve")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--background", "background_path", required=True, type=click.Path(exists=True))
@click.option("--background-mode", default="median", show_default=True)
@click.option("--port", default=8787, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--default-samples", default="auto", show_default=True)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--cors-allow-origin", default="*", show_default=True)
def cli_serve(model_path, background_path, background_mode, port, host,
              default_samples, seed, cors_allow_origin):
    """Run the HTTP explanation service until terminated."""
    try:
        if not 1 <= port <= 65535:
            raise ConfigError(f"port {port} outside [1, 65535]")
        model, dataset, background, mode = _load_engine(
            model_path, background_path, background_mode
        )
        samples = _parse_samples(default_samples)
    except _MODEL_ERRORS as exc:
        _fail(3, str(exc))
    except _VALIDATION_ERRORS as exc:
        _fail(2, str(exc))

    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((host, port))
    except OSError as exc:
        probe.close()
        _fail(4, f"cannot bind {host}:{port}: {exc}")
    probe.close()

    from .service import create_app

    app = create_app(
        model,
        dataset.feature_names,
        background,
        model_type=_model_type(model),
        background_mode=mode,
        default_samples=samples,
        default_seed=seed,
        cors_allow_origin=cors_allow_origin,
    )
    import uvicorn

    log_env = os.environ.get("SHAPBOX_LOG", "").lower()
    uvicorn.run(
        app,
        host=host,
        port=port,
        log_level="debug" if log_env == "debug" else "info",
    )


@main.command("bench")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--background", "background_path", required=True, type=click.Path(exists=True))
@click.option("--background-mode", default="median", show_default=True)
@click.option("--instances", "instances_path", required=True, type=click.Path(exists=True),
              help="CSV of instances to explain (header row)")
@click.option("--samples", "samples_list", required=True,
              help="comma-separated coalition budgets, e.g. 256,1024")
@click.option("--repeats", default=5, show_default=True, type=int)
@click.option("--output", "output_path", default=None, type=click.Path(),
              help="write the CSV report here (stdout if omitted)")
@click.option("--figure", "figure_path", default=None, type=click.Path(),
              help="figure path (defaults next to --output)")
def cli_bench(model_path, background_path, background_mode, instances_path,
              samples_list, repeats, output_path, figure_path):
    """Time explanations and measure error against full enumeration."""
    try:
        if repeats < 1:
            raise ConfigError(f"--repeats must be >= 1, got {repeats}")
        try:
            budgets = [int(tok) for tok in samples_list.split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"bad --samples list {samples_list!r}") from None
        if not budgets:
            raise ConfigError("--samples list is empty")
        model, dataset, background, _ = _load_engine(
            model_path, background_path, background_mode
        )
        instances = load_dataset(instances_path)
        if instances.n_features != background.shape[1]:
            raise ShapeMismatchError(
                f"instances width {instances.n_features} != background width "
                f"{background.shape[1]}"
            )

        references = []
        for row in instances.rows:
            n_varying = int(find_varying_features(row, background).sum())
            if n_varying > 20:
                raise CostGuardError(
                    f"{n_varying} varying features: full-enumeration reference too large"
                )
            full = explain(model, row, background, ExplainerConfig(n_samples=2**22))
            references.append(full.phi)

        report = []
        for budget in budgets:
            times, errors = [], []
            for row, reference in zip(instances.rows, references):
                for rep in range(repeats):
                    cfg = ExplainerConfig(n_samples=budget, seed=rep)
                    start = time.perf_counter()
                    result = explain(model, row, background, cfg)
                    times.append((time.perf_counter() - start) * 1000.0)
                    errors.append(float(np.mean(np.abs(result.phi - reference))))
            report.append(
                (budget, float(np.mean(times)), float(np.std(times)), float(np.mean(errors)))
            )
    except _MODEL_ERRORS as exc:
        _fail(3, str(exc))
    except _VALIDATION_ERRORS as exc:
        _fail(2, str(exc))

    lines = ["budget,mean_ms,stddev_ms,mean_abs_error"]
    for budget, mean_ms, std_ms, err in report:
        lines.append(f"{budget},{mean_ms!r},{std_ms!r},{err!r}")
    text = "\n".join(lines)
    if output_path is None:
        click.echo(text)
    else:
        Path(output_path).write_text(text + "\n", encoding="utf-8")
        if figure_path is None:
            figure_path = str(Path(output_path).with_suffix(".png"))
    if figure_path is not None:
        from .plots import save_bench_chart

        save_bench_chart(
            [r[0] for r in report],
            [r[1] for r in report],
            [r[3] for r in report],
            figure_path,
        )


if __name__ == "__main__":
    main()

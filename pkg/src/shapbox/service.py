"""HTTP explanation service: /api/metadata, /api/predict, /api/explain.

Thin, stateless wrapper over the explainer; every response is checked for the
efficiency identity before it leaves the process.  Errors use a uniform
``{"error": {"code", "message", "field"?}}`` envelope.
"""

from __future__ import annotations

import logging
import time
from typing import Literal, Optional, Union

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .core import ExplainerConfig, explain
from .errors import (
    ConfigError,
    ModelContractError,
    NumericError,
    ShapboxError,
    ShapeMismatchError,
)
from .models import predict_batch

EFFICIENCY_TOL = 1e-9

logger = logging.getLogger("shapbox.service")


class PredictRequest(BaseModel):
    instance: list[float]


class ExplainRequest(BaseModel):
    instance: list[float]
    samples: Optional[Union[int, Literal["auto"]]] = None
    seed: Optional[int] = None


def _error_response(status: int, code: str, message: str, field: Optional[str] = None):
    body = {"error": {"code": code, "message": message}}
    if field is not None:
        body["error"]["field"] = field
    return JSONResponse(status_code=status, content=body)


def create_app(
    model,
    feature_names: list[str],
    background: np.ndarray,
    *,
    model_type: str = "unknown",
    background_mode: str = "median",
    default_samples: Optional[int] = None,
    default_seed: int = 0,
    cors_allow_origin: str = "*",
) -> FastAPI:
    """Build the service around one loaded model and background set."""
    app = FastAPI(title="shapbox", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=[cors_allow_origin],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    background = np.asarray(background, dtype=float)
    n_features = background.shape[1]

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        loc = [str(p) for p in first.get("loc", []) if p != "body"]
        return _error_response(
            422,
            "invalid_request",
            first.get("msg", "invalid request body"),
            field=".".join(loc) or None,
        )

    @app.exception_handler(ShapboxError)
    async def on_shapbox_error(request: Request, exc: ShapboxError):
        if isinstance(exc, (ShapeMismatchError, ConfigError)):
            return _error_response(422, "invalid_request", str(exc))
        if isinstance(exc, (ModelContractError, NumericError)):
            return _error_response(500, "model_error", str(exc))
        return _error_response(500, "internal_error", str(exc))

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        logger.info(
            "%s %s -> %d in %.1f ms",
            request.method,
            request.url.path,
            response.status_code,
            (time.perf_counter() - start) * 1000.0,
        )
        return response

    def _check_width(instance: list[float]):
        if len(instance) != n_features:
            return _error_response(
                422,
                "width_mismatch",
                f"instance has {len(instance)} features, model expects {n_features}",
                field="instance",
            )
        return None

    @app.get("/api/metadata")
    async def metadata():
        return {
            "feature_names": feature_names,
            "n_features": n_features,
            "model_type": model_type,
            "background": {"mode": background_mode, "rows": int(background.shape[0])},
        }

    @app.post("/api/predict")
    async def predict(req: PredictRequest):
        bad = _check_width(req.instance)
        if bad is not None:
            return bad
        x = np.asarray(req.instance, dtype=float)
        prediction = float(predict_batch(model, x[None, :])[0])
        return {"prediction": prediction}

    @app.post("/api/explain")
    async def explain_endpoint(req: ExplainRequest):
        bad = _check_width(req.instance)
        if bad is not None:
            return bad
        if req.samples == "auto":
            n_samples = None
        elif req.samples is None:
            n_samples = default_samples
        else:
            n_samples = int(req.samples)
        cfg = ExplainerConfig(
            n_samples=n_samples,
            seed=default_seed if req.seed is None else int(req.seed),
        )
        x = np.asarray(req.instance, dtype=float)
        start = time.perf_counter()
        result = explain(model, x, background, cfg)
        prediction = float(predict_batch(model, x[None, :])[0])
        elapsed_ms = (time.perf_counter() - start) * 1000.0

        gap = abs(result.base_value + result.phi.sum() - prediction)
        if gap > EFFICIENCY_TOL * max(1.0, abs(prediction)):
            return _error_response(
                500,
                "efficiency_violation",
                f"attributions do not reproduce the prediction (gap {gap:.3e})",
            )
        return {
            "prediction": prediction,
            "base_value": result.base_value,
            "phi": [float(v) for v in result.phi],
            "feature_names": feature_names,
            "samples_used": result.samples_used,
            "elapsed_ms": elapsed_ms,
        }

    return app

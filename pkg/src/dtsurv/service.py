"""HTTP prognosis service: survival curves with bands over JSON.

One process multiplexes any number of trained models; each request names a
model, supplies the raw patient attributes its encoder expects, and gets
back the monthly survival curve, optional percentile bands, and the 6/12/60
month probabilities. Models are immutable, so concurrent identical requests
return identical bodies.
"""

from __future__ import annotations

import json
import logging
import os
import time
from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .config import ServiceConfig
from .core import FeatureSchema, FeatureVector, MonthGrid
from .encode import EncoderMap, InvalidFieldValue, MissingColumn, encode_record
from .geo import (
    AmbiguousAddress,
    CompositeResolver,
    GeoResolver,
    HttpGeoResolver,
    NetworkFailure,
    QuotaExceeded,
    StaticFipsResolver,
    UnknownFips,
)
from .learners import HazardModel, load_model
from .learners.base import CorruptFile
from .survival import bootstrap_bands, pmf_from_hazard, predict_hazard_curve, survival_from_hazard

__all__ = ["ModelEntry", "Registry", "build_registry", "create_app", "MAX_RESAMPLES"]

logger = logging.getLogger("dtsurv.service")

MAX_RESAMPLES = 10000  # server-side cap keeps band latency bounded
HORIZON_PROBS = (6, 12, 60)


class PredictRequest(BaseModel):
    model_id: str
    attributes: dict[str, Any] = Field(default_factory=dict)
    with_bands: bool = False
    n_resamples: int = Field(default=1000, ge=2)
    seed: int = Field(default=0, ge=0)


class PredictResponse(BaseModel):
    months: list[int]
    survival: list[float]
    lower: list[float] | None = None
    upper: list[float] | None = None
    horizon_probs: dict[str, float]


class FieldError(Exception):
    """Attribute-level problem reported back as a 400 with diagnostics."""

    def __init__(self, errors: list[dict]):
        super().__init__(str(errors))
        self.errors = errors


@dataclass
class ModelEntry:
    model_id: str
    model: HazardModel
    encoder: EncoderMap | None
    resolver: GeoResolver | None

    @property
    def grid(self) -> MonthGrid:
        stats = self.model.train_stats
        return MonthGrid(max(1, stats.max_duration)) if stats else MonthGrid(60)

    def descriptor(self) -> dict:
        fields: list[dict] = []
        if self.encoder is not None:
            for column, categories in self.encoder.nominal:
                fields.append({"name": column, "kind": "nominal", "categories": list(categories)})
            for column in self.encoder.numeric:
                fields.append({"name": column, "kind": "numeric"})
            if self.encoder.geo_column is not None:
                fields.append({"name": self.encoder.geo_column, "kind": "geo"})
        else:
            fields.extend(
                {"name": name, "kind": "numeric"} for name in self.model.schema.names[:-1]
            )
        return {
            "model_id": self.model_id,
            "kind": self.model.kind,
            "horizon": self.grid.horizon,
            "fields": fields,
        }

    def encode(self, attributes: Mapping[str, Any]) -> FeatureVector:
        if self.encoder is not None:
            record = {str(k): str(v) for k, v in attributes.items()}
            try:
                return encode_record(self.encoder, record, self.resolver)
            except MissingColumn as exc:
                raise FieldError([{"field": _column_of(exc), "message": str(exc)}]) from exc
            except InvalidFieldValue as exc:
                raise FieldError([{"field": exc.column, "message": str(exc)}]) from exc

        names = self.model.schema.names[:-1]
        errors = []
        values = []
        for name in names:
            if name not in attributes:
                errors.append({"field": name, "message": "missing numeric feature"})
                continue
            try:
                values.append(float(attributes[name]))
            except (TypeError, ValueError):
                errors.append({"field": name, "message": f"cannot read {attributes[name]!r} as a number"})
        if errors:
            raise FieldError(errors)
        return FeatureVector(FeatureSchema(names), np.array(values))


def _column_of(exc: Exception) -> str:
    text = str(exc)
    if "'" in text:
        return text.split("'")[1]
    return "attributes"


class Registry:
    def __init__(self, entries: list[ModelEntry]):
        self._entries = {e.model_id: e for e in entries}
        if len(self._entries) != len(entries):
            raise ValueError("duplicate model_id in registry")

    def __len__(self) -> int:
        return len(self._entries)

    def get(self, model_id: str) -> ModelEntry | None:
        return self._entries.get(model_id)

    def descriptors(self) -> list[dict]:
        return [self._entries[k].descriptor() for k in sorted(self._entries)]


def _load_encoder(path: str) -> EncoderMap:
    try:
        with open(path, encoding="utf-8") as fh:
            return EncoderMap.from_json_dict(json.load(fh))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CorruptFile(f"cannot read encoder map {path}: {exc}") from exc


def build_registry(config: ServiceConfig) -> Registry:
    """Scan the model directory; any unreadable file aborts startup.

    Layout: ``<dir>/<model_id>.json`` for bare models, or a subdirectory
    ``<dir>/<model_id>/`` holding ``model.json`` plus optional
    ``encoder.json`` for models that take raw attributes.
    """
    address_resolver = None
    if config.geocode_url and config.elevation_url:
        address_resolver = HttpGeoResolver(
            config.geocode_url, config.elevation_url, cache_path=config.geo_cache
        )
    resolver = CompositeResolver(StaticFipsResolver(), address_resolver)

    entries: list[ModelEntry] = []
    root = config.model_dir
    if not os.path.isdir(root):
        raise NotADirectoryError(f"model directory {root!r} does not exist")
    for name in sorted(os.listdir(root)):
        path = os.path.join(root, name)
        if os.path.isfile(path) and name.endswith(".json"):
            model_id = name[: -len(".json")]
            entries.append(ModelEntry(model_id, load_model(path), None, resolver))
        elif os.path.isdir(path) and os.path.exists(os.path.join(path, "model.json")):
            encoder = None
            encoder_path = os.path.join(path, "encoder.json")
            if os.path.exists(encoder_path):
                encoder = _load_encoder(encoder_path)
            entries.append(
                ModelEntry(name, load_model(os.path.join(path, "model.json")), encoder, resolver)
            )
    return Registry(entries)


def create_app(registry: Registry, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="dtsurv prognosis service", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError) -> JSONResponse:
        detail = [
            {"field": ".".join(str(p) for p in err.get("loc", [])), "message": err.get("msg", "")}
            for err in exc.errors()
        ]
        return JSONResponse(status_code=400, content={"detail": detail})

    @app.middleware("http")
    async def request_log(request: Request, call_next):
        started = time.perf_counter()
        response = await call_next(request)
        elapsed_ms = (time.perf_counter() - started) * 1000.0
        model_id = getattr(request.state, "model_id", "-")
        logger.info(
            "%s %s model=%s status=%d latency_ms=%.1f",
            request.method,
            request.url.path,
            model_id,
            response.status_code,
            elapsed_ms,
        )
        return response

    @app.get("/healthz")
    async def healthz() -> dict:
        return {"status": "ok", "models_loaded": len(registry)}

    @app.get("/api/v1/models")
    async def models() -> list[dict]:
        return registry.descriptors()

    @app.post("/api/v1/predict")
    async def predict(request: Request, body: PredictRequest) -> JSONResponse:
        request.state.model_id = body.model_id
        entry = registry.get(body.model_id)
        if entry is None:
            return JSONResponse(status_code=404, content={"detail": f"unknown model {body.model_id!r}"})

        try:
            x = entry.encode(body.attributes)
        except FieldError as exc:
            return JSONResponse(status_code=400, content={"detail": exc.errors})
        except (NetworkFailure, QuotaExceeded) as exc:
            return JSONResponse(status_code=502, content={"detail": str(exc)})
        except (AmbiguousAddress, UnknownFips) as exc:
            return JSONResponse(status_code=422, content={"detail": str(exc)})

        grid = entry.grid
        hazard = predict_hazard_curve(entry.model, x, grid)
        curve = survival_from_hazard(hazard)
        lower = upper = None
        if body.with_bands:
            stats = entry.model.train_stats
            if stats is None:
                return JSONResponse(
                    status_code=400,
                    content={"detail": "model carries no training stats; bands unavailable"},
                )
            lo, hi = bootstrap_bands(
                curve,
                pmf_from_hazard(hazard),
                stats.duration_histogram,
                n_resamples=min(body.n_resamples, MAX_RESAMPLES),
                seed=body.seed,
            )
            lower, upper = lo.tolist(), hi.tolist()

        response = PredictResponse(
            months=[int(j) for j in grid.months()],
            survival=curve.values.tolist(),
            lower=lower,
            upper=upper,
            horizon_probs={str(h): curve.at(h) for h in HORIZON_PROBS},
        )
        return JSONResponse(content=response.model_dump())

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app

"""Versioned, self-describing on-disk model format (JSON).

The document carries the format version, model kind, feature schema with
its fingerprint, hyperparameters, and the learned state. Floats survive the
round trip exactly (shortest-repr encoding), so a loaded model predicts
bit-identically to the saved one.
"""

from __future__ import annotations

import json
import os
from typing import Type

from ..core import DatasetStats, FeatureSchema
from .base import CorruptFile, HazardModel, VersionMismatch
from .forest import RandomForestHazard
from .lifetable import LifeTableHazard
from .mlp import MlpHazard
from .tree import DecisionTreeHazard

__all__ = ["save_model", "load_model", "FORMAT_NAME", "FORMAT_VERSION"]

FORMAT_NAME = "dtsurv-model"
FORMAT_VERSION = 1

MODEL_KINDS: dict[str, Type[HazardModel]] = {
    cls.kind: cls
    for cls in (DecisionTreeHazard, RandomForestHazard, MlpHazard, LifeTableHazard)
}


def save_model(m: HazardModel, path: str | os.PathLike) -> None:
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": m.kind,
        "schema": list(m.schema.names),
        "schema_fingerprint": m.schema.fingerprint,
        "params": m.params_dict(),
        "payload": m.payload(),
        "train_stats": m.train_stats.to_json_dict() if m.train_stats else None,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)


def load_model(path: str | os.PathLike) -> HazardModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFile(f"cannot read model file {path}: {exc}") from exc

    if not isinstance(doc, dict) or doc.get("format") != FORMAT_NAME:
        raise CorruptFile(f"{path} is not a {FORMAT_NAME} file")
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"{path} has format version {version}, expected {FORMAT_VERSION}")

    try:
        kind = doc["kind"]
        if kind not in MODEL_KINDS:
            raise CorruptFile(f"unknown model kind {kind!r} in {path}")
        schema = FeatureSchema(tuple(doc["schema"]))
        if doc["schema_fingerprint"] != schema.fingerprint:
            raise CorruptFile(f"schema fingerprint mismatch in {path}")
        stats = DatasetStats.from_json_dict(doc["train_stats"]) if doc["train_stats"] else None
        return MODEL_KINDS[kind].from_payload(schema, doc["params"], doc["payload"], stats)
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise CorruptFile(f"inconsistent model file {path}: {exc}") from exc

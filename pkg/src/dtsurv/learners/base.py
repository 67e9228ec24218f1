"""The hazard-model contract shared by every trainable classifier."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import ClassVar, Mapping

import numpy as np

from ..core import DatasetStats, DtsurvError, FeatureSchema, FeatureVector

__all__ = [
    "HazardModel",
    "SingleClassData",
    "DivergedTraining",
    "SchemaFingerprintMismatch",
    "VersionMismatch",
    "CorruptFile",
    "require_both_classes",
]


class SingleClassData(DtsurvError):
    """Training rows contain only one class; a probabilistic split is undefined."""


class DivergedTraining(DtsurvError):
    """Training loss became non-finite."""


class SchemaFingerprintMismatch(DtsurvError):
    """The input schema does not match the schema the model was trained on."""


class VersionMismatch(DtsurvError):
    """The model file was written by an unsupported format version."""


class CorruptFile(DtsurvError):
    """The model file is unreadable or internally inconsistent."""


def require_both_classes(targets: np.ndarray) -> None:
    positives = int(np.asarray(targets, dtype=bool).sum())
    if positives == 0 or positives == len(targets):
        raise SingleClassData(
            f"training data has a single class ({positives} of {len(targets)} rows positive)"
        )


class HazardModel(ABC):
    """A trained binary classifier predicting per-month death probability.

    The schema always includes the month feature as its last column. Trained
    models are immutable and safe for concurrent prediction.
    """

    kind: ClassVar[str]

    def __init__(self, schema: FeatureSchema, train_stats: DatasetStats | None = None):
        self.schema = schema
        self.train_stats = train_stats

    @abstractmethod
    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        """Probabilities in [0, 1] for each row of ``X`` (schema-ordered columns)."""

    def predict_probability(self, x: FeatureVector) -> float:
        if x.schema.fingerprint != self.schema.fingerprint:
            raise SchemaFingerprintMismatch(
                f"model was trained on schema {self.schema.names}, got {x.schema.names}"
            )
        return float(self.predict_matrix(x.values[None, :])[0])

    @property
    def schema_fingerprint(self) -> str:
        return self.schema.fingerprint

    @abstractmethod
    def params_dict(self) -> dict:
        """Hyperparameters used to fit the model, as plain JSON types."""

    @abstractmethod
    def payload(self) -> dict:
        """Learned state (weights/splits) as plain JSON types."""

    @classmethod
    @abstractmethod
    def from_payload(
        cls,
        schema: FeatureSchema,
        params: Mapping,
        payload: Mapping,
        train_stats: DatasetStats | None,
    ) -> "HazardModel":
        """Rebuild a trained model from its serialized parts."""

"""Covariate-free baseline: per-month death fraction of the training rows."""

from __future__ import annotations

from typing import Mapping

import numpy as np

from ..core import DatasetStats, FeatureSchema
from ..transform import ExpandedDataset
from .base import HazardModel

__all__ = ["LifeTableHazard", "train_life_table"]


class LifeTableHazard(HazardModel):
    """Predicts deaths-at-month over rows-at-month, ignoring covariates.

    Months beyond the training horizon repeat the last observed hazard.
    """

    kind = "lifetable"

    def __init__(
        self,
        schema: FeatureSchema,
        hazards: np.ndarray,
        train_stats: DatasetStats | None = None,
    ):
        super().__init__(schema, train_stats)
        self.hazards = np.asarray(hazards, dtype=np.float64)

    def predict_matrix(self, X: np.ndarray) -> np.ndarray:
        months = np.asarray(X, dtype=np.float64)[:, -1].astype(np.int64)
        months = np.clip(months, 0, self.hazards.size - 1)
        return self.hazards[months]

    def params_dict(self) -> dict:
        return {}

    def payload(self) -> dict:
        return {"hazards": self.hazards.tolist()}

    @classmethod
    def from_payload(
        cls,
        schema: FeatureSchema,
        params: Mapping,
        payload: Mapping,
        train_stats: DatasetStats | None,
    ) -> "LifeTableHazard":
        return cls(schema, np.asarray(payload["hazards"], dtype=np.float64), train_stats)


def train_life_table(e: ExpandedDataset) -> LifeTableHazard:
    """Tabulate the per-month death fraction of the expanded rows."""
    if len(e) == 0:
        raise ValueError("cannot train on an empty expanded dataset")
    months = e.months()
    horizon = int(months.max())
    at_risk = np.bincount(months, minlength=horizon + 1).astype(np.float64)
    deaths = np.bincount(months, weights=e.targets.astype(np.float64), minlength=horizon + 1)
    hazards = np.divide(deaths, at_risk, out=np.zeros_like(deaths), where=at_risk > 0)
    return LifeTableHazard(e.schema, hazards, e.source_stats)

"""Shared builders for randomized survival datasets."""

from __future__ import annotations

import numpy as np

from dtsurv import Dataset, FeatureSchema, FeatureVector, SurvivalRecord


def make_dataset(rows, feature_names=("x0", "x1")) -> Dataset:
    """rows: iterable of (duration, event) or (duration, event, values)."""
    schema = FeatureSchema(tuple(feature_names))
    records = []
    for i, row in enumerate(rows):
        if len(row) == 2:
            duration, event = row
            values = np.zeros(len(feature_names))
        else:
            duration, event, values = row
            values = np.asarray(values, dtype=float)
        records.append(
            SurvivalRecord(f"p{i}", FeatureVector(schema, values), int(duration), bool(event))
        )
    return Dataset(schema, records)


def random_dataset(
    rng: np.random.Generator,
    n_patients: int | None = None,
    n_features: int = 2,
    max_duration: int = 12,
    event_prob: float = 0.6,
) -> Dataset:
    n = int(rng.integers(1, 30)) if n_patients is None else n_patients
    schema = FeatureSchema(tuple(f"f{i}" for i in range(n_features)))
    records = [
        SurvivalRecord(
            patient_id=f"p{i}",
            covariates=FeatureVector(schema, rng.normal(size=n_features)),
            duration_months=int(rng.integers(0, max_duration + 1)),
            event=bool(rng.random() < event_prob),
        )
        for i in range(n)
    ]
    return Dataset(schema, records)


def geometric_dataset(
    rng: np.random.Generator, n_patients: int, p: float, horizon: int = 10_000
) -> Dataset:
    """Uncensored cohort with constant per-month death probability p."""
    schema = FeatureSchema(("x",))
    durations = rng.geometric(p, size=n_patients) - 1  # months are 0-based
    durations = np.minimum(durations, horizon)
    records = [
        SurvivalRecord(f"p{i}", FeatureVector(schema, np.zeros(1)), int(t), True)
        for i, t in enumerate(durations)
    ]
    return Dataset(schema, records)

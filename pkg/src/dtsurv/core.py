"""Shared domain types: feature schemas, patient records, the month grid, datasets.

Everything here is immutable after construction and safe to share across
threads. File I/O for these types lives in :mod:`dtsurv.encode` and the CLI.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

__all__ = [
    "DtsurvError",
    "EmptyDataset",
    "FeatureSchema",
    "FeatureVector",
    "SurvivalRecord",
    "ExpandedRow",
    "MonthGrid",
    "Dataset",
    "DatasetStats",
    "MONTH_FEATURE",
    "dataset_stats",
]

# Name of the per-month feature appended to a schema by the expansion step.
MONTH_FEATURE = "month"


class DtsurvError(Exception):
    """Base class for every error raised by this package."""


class EmptyDataset(DtsurvError):
    """A dataset with zero records was passed where records are required."""


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered, named feature positions shared by every vector in a dataset."""

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate feature names in schema")

    def __len__(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        return self.names.index(name)

    @property
    def fingerprint(self) -> str:
        """Stable hex digest of the ordered feature names."""
        joined = "\x1f".join(self.names)
        return hashlib.sha256(joined.encode("utf-8")).hexdigest()

    def with_month(self) -> "FeatureSchema":
        """Schema of the expanded dataset: original features plus the month."""
        if MONTH_FEATURE in self.names:
            raise ValueError(f"schema already contains a {MONTH_FEATURE!r} feature")
        return FeatureSchema(self.names + (MONTH_FEATURE,))


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Numeric values keyed by a :class:`FeatureSchema`; all values finite."""

    schema: FeatureSchema
    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] != len(self.schema):
            raise ValueError(
                f"vector length {arr.shape} does not match schema length {len(self.schema)}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureVector):
            return NotImplemented
        return self.schema == other.schema and np.array_equal(self.values, other.values)

    def value(self, name: str) -> float:
        return float(self.values[self.schema.index(name)])

    def with_month(self, month: int) -> "FeatureVector":
        """Append a month value, producing a vector on the expanded schema."""
        return FeatureVector(
            self.schema.with_month(),
            np.concatenate([self.values, [float(month)]]),
        )


@dataclass(frozen=True)
class SurvivalRecord:
    """One patient: covariates, observed duration in months, and event flag.

    ``event`` is true when the death was observed; false means the record is
    right-censored at ``duration_months``.
    """

    patient_id: str
    covariates: FeatureVector
    duration_months: int
    event: bool

    def __post_init__(self) -> None:
        if self.duration_months < 0:
            raise ValueError(f"duration_months must be >= 0, got {self.duration_months}")


@dataclass(frozen=True)
class ExpandedRow:
    """One (patient, month) classification row produced by the expansion."""

    patient_id: str
    covariates: FeatureVector
    month: int
    target: bool


@dataclass(frozen=True)
class MonthGrid:
    """Inclusive month grid 0..horizon on which curves are evaluated."""

    horizon: int

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")

    def months(self) -> np.ndarray:
        return np.arange(self.horizon + 1)

    def __len__(self) -> int:
        return self.horizon + 1

    @classmethod
    def for_dataset(cls, d: "Dataset") -> "MonthGrid":
        """Grid covering the longest observed duration (horizon >= 1)."""
        return cls(max(1, dataset_stats(d).max_duration))


class Dataset:
    """Immutable collection of :class:`SurvivalRecord` under one schema."""

    def __init__(self, schema: FeatureSchema, records: list[SurvivalRecord] | tuple[SurvivalRecord, ...]):
        records = tuple(records)
        seen: set[str] = set()
        for r in records:
            if r.covariates.schema != schema:
                raise ValueError(f"record {r.patient_id} does not conform to the dataset schema")
            if r.patient_id in seen:
                raise ValueError(f"duplicate patient_id {r.patient_id!r}")
            seen.add(r.patient_id)
        self._schema = schema
        self._records = records

    @property
    def schema(self) -> FeatureSchema:
        return self._schema

    @property
    def records(self) -> tuple[SurvivalRecord, ...]:
        return self._records

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[SurvivalRecord]:
        return iter(self._records)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self._schema == other._schema and self._records == other._records

    def durations(self) -> np.ndarray:
        return np.array([r.duration_months for r in self._records], dtype=np.int64)

    def events(self) -> np.ndarray:
        return np.array([r.event for r in self._records], dtype=bool)

    def covariate_matrix(self) -> np.ndarray:
        """Row-per-patient matrix in record order; empty (n, 0) when schema is empty."""
        if not self._records:
            return np.zeros((0, len(self._schema)))
        return np.stack([r.covariates.values for r in self._records])

    def subset(self, patient_ids: set[str]) -> "Dataset":
        """New dataset keeping only the given patients, in original order."""
        return Dataset(self._schema, [r for r in self._records if r.patient_id in patient_ids])


@dataclass(frozen=True)
class DatasetStats:
    """Census of a dataset: patient, event and duration counts.

    ``duration_histogram`` maps duration in months to the number of patients
    observed for exactly that long; its counts sum to ``n_patients``.
    """

    n_patients: int
    n_events: int
    n_censored: int
    max_duration: int
    duration_histogram: Mapping[int, int] = field(hash=False)

    def to_json_dict(self) -> dict:
        return {
            "n_patients": self.n_patients,
            "n_events": self.n_events,
            "n_censored": self.n_censored,
            "max_duration": self.max_duration,
            "duration_histogram": {str(k): v for k, v in sorted(self.duration_histogram.items())},
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "DatasetStats":
        return cls(
            n_patients=int(obj["n_patients"]),
            n_events=int(obj["n_events"]),
            n_censored=int(obj["n_censored"]),
            max_duration=int(obj["max_duration"]),
            duration_histogram={int(k): int(v) for k, v in obj["duration_histogram"].items()},
        )


def dataset_stats(d: Dataset) -> DatasetStats:
    """Count patients, events, censorings and tabulate observed durations."""
    if len(d) == 0:
        raise EmptyDataset("dataset has no records")
    histogram: dict[int, int] = {}
    n_events = 0
    max_duration = 0
    for r in d:
        histogram[r.duration_months] = histogram.get(r.duration_months, 0) + 1
        n_events += int(r.event)
        max_duration = max(max_duration, r.duration_months)
    return DatasetStats(
        n_patients=len(d),
        n_events=n_events,
        n_censored=len(d) - n_events,
        max_duration=max_duration,
        duration_histogram=histogram,
    )

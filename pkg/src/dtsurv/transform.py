"""Person-month expansion of censored records and balanced train/test splits.

A patient observed for T months contributes T+1 rows, one per month 0..T.
The binary target is false everywhere except the final row, where it equals
the event flag. Trained on these rows, any probabilistic classifier learns
the per-month death probability conditioned on survival so far.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .core import (
    MONTH_FEATURE,
    Dataset,
    DatasetStats,
    DtsurvError,
    ExpandedRow,
    FeatureSchema,
    FeatureVector,
    dataset_stats,
)

__all__ = [
    "ExpandedDataset",
    "SplitPair",
    "SinkFailure",
    "UnbalancedSplit",
    "NoPositiveRows",
    "expand",
    "expand_streaming",
    "patient_split",
    "balance_ratio",
]


class SinkFailure(DtsurvError):
    """A streaming consumer raised; ``rows_emitted`` rows were already delivered."""

    def __init__(self, rows_emitted: int, cause: BaseException):
        super().__init__(f"sink failed after {rows_emitted} rows: {cause}")
        self.rows_emitted = rows_emitted
        self.cause = cause


class UnbalancedSplit(DtsurvError):
    """No resampled split met the balance-ratio tolerance."""

    def __init__(self, attempts: int, tolerance: float, best_gap: float | None):
        gap = "undefined" if best_gap is None else f"{best_gap:.4f}"
        super().__init__(
            f"no split within relative ratio gap {tolerance} after {attempts} attempts"
            f" (best achieved gap: {gap})"
        )
        self.attempts = attempts
        self.tolerance = tolerance
        self.best_gap = best_gap


class NoPositiveRows(DtsurvError):
    """Every expanded row has a false target; the balance ratio is undefined."""


class ExpandedDataset:
    """Column-store of expanded rows: one block of contiguous months per patient.

    ``schema`` is the source schema with the month feature appended as the
    last column; ``matrix``/``targets`` expose the training arrays and
    ``rows()`` iterates :class:`ExpandedRow` views for row-level consumers.
    """

    def __init__(
        self,
        schema: FeatureSchema,
        patient_ids: Sequence[str],
        matrix: np.ndarray,
        targets: np.ndarray,
        source_stats: DatasetStats,
    ):
        matrix = np.asarray(matrix, dtype=np.float64)
        targets = np.asarray(targets, dtype=bool)
        if matrix.shape != (len(patient_ids), len(schema)):
            raise ValueError("matrix shape does not match patients x schema")
        if targets.shape != (len(patient_ids),):
            raise ValueError("targets length does not match row count")
        if schema.names[-1] != MONTH_FEATURE:
            raise ValueError(f"expanded schema must end with the {MONTH_FEATURE!r} feature")
        self.schema = schema
        self.patient_ids = tuple(patient_ids)
        self.matrix = matrix
        self.targets = targets
        self.source_stats = source_stats

    def __len__(self) -> int:
        return len(self.patient_ids)

    @property
    def source_schema(self) -> FeatureSchema:
        return FeatureSchema(self.schema.names[:-1])

    def months(self) -> np.ndarray:
        return self.matrix[:, -1].astype(np.int64)

    def row(self, i: int) -> ExpandedRow:
        return ExpandedRow(
            patient_id=self.patient_ids[i],
            covariates=FeatureVector(self.source_schema, self.matrix[i, :-1]),
            month=int(self.matrix[i, -1]),
            target=bool(self.targets[i]),
        )

    def rows(self) -> Iterator[ExpandedRow]:
        return (self.row(i) for i in range(len(self)))


def _expansion_arrays(d: Dataset) -> tuple[list[str], np.ndarray, np.ndarray]:
    """Vectorized expansion: repeat covariates T+1 times, append month column."""
    durations = d.durations()
    events = d.events()
    counts = durations + 1
    total = int(counts.sum())
    covariates = d.covariate_matrix()

    repeated = np.repeat(covariates, counts, axis=0)
    # months: 0..T for each patient, concatenated
    offsets = np.concatenate([[0], np.cumsum(counts)])
    months = np.arange(total) - np.repeat(offsets[:-1], counts)
    targets = np.zeros(total, dtype=bool)
    last_rows = offsets[1:] - 1
    targets[last_rows] = events

    ids: list[str] = []
    for r, c in zip(d.records, counts):
        ids.extend([r.patient_id] * int(c))
    matrix = np.column_stack([repeated, months.astype(np.float64)])
    return ids, matrix, targets


def expand(d: Dataset) -> ExpandedDataset:
    """Expand every record into its per-month rows, grouped by patient."""
    if len(d) == 0:
        empty = DatasetStats(0, 0, 0, 0, {})
        return ExpandedDataset(
            d.schema.with_month(),
            [],
            np.zeros((0, len(d.schema) + 1)),
            np.zeros(0, dtype=bool),
            empty,
        )
    stats = dataset_stats(d)
    ids, matrix, targets = _expansion_arrays(d)
    return ExpandedDataset(d.schema.with_month(), ids, matrix, targets, stats)


def expand_streaming(
    d: Dataset,
    sink: Callable[[list[ExpandedRow]], None],
    chunk_size: int,
) -> int:
    """Feed the rows of :func:`expand` to ``sink`` in chunks of ``chunk_size``.

    Rows arrive in the same order as :func:`expand` produces them, without
    the full expansion ever being materialized. Returns the total row count.
    Exceptions from ``sink`` are wrapped in :class:`SinkFailure` carrying the
    number of rows delivered by the chunks that completed.
    """
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be >= 1, got {chunk_size}")
    emitted = 0
    buffer: list[ExpandedRow] = []

    def flush() -> None:
        nonlocal emitted
        if not buffer:
            return
        chunk, count = list(buffer), len(buffer)
        buffer.clear()
        try:
            sink(chunk)
        except Exception as exc:
            raise SinkFailure(emitted, exc) from exc
        emitted += count

    for r in d:
        for month in range(r.duration_months + 1):
            buffer.append(
                ExpandedRow(
                    patient_id=r.patient_id,
                    covariates=r.covariates,
                    month=month,
                    target=bool(r.event) and month == r.duration_months,
                )
            )
            if len(buffer) == chunk_size:
                flush()
    flush()
    return emitted


def balance_ratio(e: ExpandedDataset) -> float:
    """Negative-to-positive row ratio of an expanded dataset."""
    positives = int(e.targets.sum())
    if positives == 0:
        raise NoPositiveRows("expanded dataset has no rows with a true target")
    return (len(e) - positives) / positives


def _ratio_from_counts(durations: np.ndarray, events: np.ndarray) -> float | None:
    """balance_ratio(expand(...)) without expanding: rows=T+1, positives=events."""
    positives = int(events.sum())
    if positives == 0:
        return None
    total = int((durations + 1).sum())
    return (total - positives) / positives


@dataclass(frozen=True)
class SplitPair:
    """Patient-disjoint train/test partition with the draw that produced it."""

    train: Dataset
    test: Dataset
    seed: int
    test_fraction: float


def patient_split(
    d: Dataset,
    test_fraction: float = 0.03,
    ratio_tolerance: float = 0.02,
    seed: int = 0,
    max_attempts: int = 100,
) -> SplitPair:
    """Split patients into train/test so both sides share the balance ratio.

    Random patient-level splits are redrawn until the relative gap between
    the train and test balance ratios is within ``ratio_tolerance`` (measured
    against the train ratio), or :class:`UnbalancedSplit` is raised after
    ``max_attempts`` draws. Deterministic for a fixed seed.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n = len(d)
    if n < 2:
        raise ValueError("need at least 2 patients to split")
    n_test = int(round(n * test_fraction))
    n_test = min(max(n_test, 1), n - 1)

    durations = d.durations()
    events = d.events()
    rng = np.random.default_rng(seed)
    best_gap: float | None = None

    for _ in range(max_attempts):
        order = rng.permutation(n)
        test_idx = order[:n_test]
        is_test = np.zeros(n, dtype=bool)
        is_test[test_idx] = True

        train_ratio = _ratio_from_counts(durations[~is_test], events[~is_test])
        test_ratio = _ratio_from_counts(durations[is_test], events[is_test])
        if train_ratio is None or test_ratio is None:
            continue
        gap = abs(train_ratio - test_ratio) / train_ratio
        if best_gap is None or gap < best_gap:
            best_gap = gap
        if gap <= ratio_tolerance:
            test_ids = {d.records[i].patient_id for i in test_idx}
            test = d.subset(test_ids)
            train = d.subset({r.patient_id for r in d} - test_ids)
            return SplitPair(train=train, test=test, seed=seed, test_fraction=test_fraction)

    raise UnbalancedSplit(max_attempts, ratio_tolerance, best_gap)

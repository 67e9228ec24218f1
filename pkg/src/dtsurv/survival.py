"""Hazard curves, death distributions, survival curves, and bootstrap bands.

The chain is: a trained model evaluated at months 0..H gives the hazard
curve; the death-month distribution factors out of the hazard; the survival
curve is the running product of month-by-month survival. Percentile bands
come from resampling the death distribution at the training data's own
sample sizes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import DtsurvError, FeatureVector, MonthGrid
from .learners.base import HazardModel, SchemaFingerprintMismatch

__all__ = [
    "HazardCurve",
    "DeathPmf",
    "SurvivalCurve",
    "DegenerateHistogram",
    "predict_hazard_curve",
    "pmf_from_hazard",
    "survival_from_hazard",
    "bootstrap_bands",
    "write_curve_csv",
    "read_curve_csv",
]


class DegenerateHistogram(DtsurvError):
    """The training-duration histogram is empty or has no mass."""


@dataclass(frozen=True, eq=False)
class HazardCurve:
    """Per-month death probabilities for one patient over months 0..H."""

    values: np.ndarray
    grid: MonthGrid

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (self.grid.horizon + 1,):
            raise ValueError(f"expected {self.grid.horizon + 1} hazard values, got {arr.shape}")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("hazard values must lie in [0, 1]")
        object.__setattr__(self, "values", arr)


@dataclass(frozen=True, eq=False)
class DeathPmf:
    """P(death at month j) for j = 0..H plus the mass of surviving past H."""

    probabilities: np.ndarray
    tail: float

    def __post_init__(self) -> None:
        arr = np.asarray(self.probabilities, dtype=np.float64)
        if np.any(arr < 0.0) or self.tail < 0.0:
            raise ValueError("probabilities must be non-negative")
        total = float(arr.sum()) + self.tail
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"probability mass {total} is not 1 within 1e-12")
        object.__setattr__(self, "probabilities", arr)


@dataclass(frozen=True, eq=False)
class SurvivalCurve:
    """Monotone survival probabilities over months 0..H, optionally banded."""

    values: np.ndarray
    grid: MonthGrid
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.shape != (self.grid.horizon + 1,):
            raise ValueError(f"expected {self.grid.horizon + 1} survival values, got {arr.shape}")
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise ValueError("survival values must lie in [0, 1]")
        if np.any(np.diff(arr) > 0.0):
            raise ValueError("survival values must be non-increasing")
        object.__setattr__(self, "values", arr)
        if (self.lower is None) != (self.upper is None):
            raise ValueError("bands require both lower and upper")
        if self.lower is not None and self.upper is not None:
            lo = np.asarray(self.lower, dtype=np.float64)
            hi = np.asarray(self.upper, dtype=np.float64)
            if lo.shape != arr.shape or hi.shape != arr.shape:
                raise ValueError("band lengths must match the curve")
            if np.any(lo < 0.0) or np.any(hi > 1.0) or np.any(lo > hi):
                raise ValueError("bands must satisfy 0 <= lower <= upper <= 1")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)

    def with_bands(self, lower: np.ndarray, upper: np.ndarray) -> "SurvivalCurve":
        return SurvivalCurve(self.values, self.grid, lower, upper)

    def at(self, month: int) -> float:
        """Survival at a month, holding the last value beyond the horizon."""
        if month < 0:
            raise ValueError(f"month must be >= 0, got {month}")
        return float(self.values[min(month, self.grid.horizon)])


def predict_hazard_curve(m: HazardModel, x: FeatureVector, grid: MonthGrid) -> HazardCurve:
    """Evaluate the model at every month of the grid for one patient."""
    expanded_schema = x.schema.with_month()
    if expanded_schema.fingerprint != m.schema.fingerprint:
        raise SchemaFingerprintMismatch(
            f"model expects schema {m.schema.names}, got covariates {x.schema.names}"
        )
    months = grid.months().astype(np.float64)
    X = np.column_stack([np.tile(x.values, (len(months), 1)), months])
    values = np.clip(m.predict_matrix(X), 0.0, 1.0)
    return HazardCurve(values=values, grid=grid)


def pmf_from_hazard(h: HazardCurve) -> DeathPmf:
    """Factor the death-month distribution out of the hazard curve.

    P(death at j) is the hazard at j times the probability of surviving all
    earlier months; the tail is the probability of surviving every month.
    """
    survive = 1.0 - h.values
    alive_before = np.concatenate([[1.0], np.cumprod(survive)[:-1]])
    probabilities = h.values * alive_before
    tail = float(np.prod(survive))
    return DeathPmf(probabilities=probabilities, tail=tail)


def survival_from_hazard(h: HazardCurve) -> SurvivalCurve:
    """Running product of per-month survival; non-increasing by construction."""
    return SurvivalCurve(values=np.cumprod(1.0 - h.values), grid=h.grid)


def _nearest_rank_indices(n: int, level: float) -> tuple[int, int]:
    """0-indexed positions of the lower/upper nearest-rank percentiles."""
    alpha = (1.0 - level) / 2.0
    lo = max(int(np.ceil(alpha * n)) - 1, 0)
    hi = max(int(np.ceil((1.0 - alpha) * n)) - 1, 0)
    return lo, hi


def bootstrap_bands(
    s: SurvivalCurve,
    pmf: DeathPmf,
    duration_histogram: Mapping[int, int],
    n_resamples: int = 10000,
    level: float = 0.95,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Percentile bands from resampled empirical survival curves.

    Each resample draws a training duration from ``duration_histogram``,
    takes that many plus one i.i.d. death months from the patient's death
    distribution (tail mass = surviving past the horizon), and forms the
    empirical curve of the draws. Per-month nearest-rank percentiles of the
    collected curves give the band. Resample r uses the RNG stream derived
    from (seed, r), so the result is independent of evaluation order.
    """
    if n_resamples < 2:
        raise ValueError(f"n_resamples must be >= 2, got {n_resamples}")
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must be in (0, 1), got {level}")
    durations = np.array(sorted(duration_histogram), dtype=np.int64)
    counts = np.array([duration_histogram[int(t)] for t in durations], dtype=np.float64)
    if durations.size == 0 or counts.sum() <= 0:
        raise DegenerateHistogram("duration histogram has no mass")
    duration_probs = counts / counts.sum()

    horizon = s.grid.horizon
    # outcome horizon+1 is the sentinel for "survived past the horizon"
    outcome_probs = np.concatenate([pmf.probabilities, [pmf.tail]])
    outcome_probs = np.clip(outcome_probs, 0.0, None)
    outcome_probs /= outcome_probs.sum()

    curves = np.empty((n_resamples, horizon + 1), dtype=np.float64)
    for r in range(n_resamples):
        rng = np.random.default_rng((seed, r))
        n_points = int(durations[rng.choice(durations.size, p=duration_probs)]) + 1
        draws = rng.choice(horizon + 2, size=n_points, p=outcome_probs)
        died_by = np.cumsum(np.bincount(draws, minlength=horizon + 2))
        curves[r] = (n_points - died_by[: horizon + 1]) / n_points

    curves.sort(axis=0)
    lo_idx, hi_idx = _nearest_rank_indices(n_resamples, level)
    return curves[lo_idx].copy(), curves[hi_idx].copy()


def write_curve_csv(curve: SurvivalCurve, path: str) -> None:
    """Export as month,survival,lower,upper; band columns blank when absent."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["month", "survival", "lower", "upper"])
        for j in range(curve.grid.horizon + 1):
            lower = repr(float(curve.lower[j])) if curve.lower is not None else ""
            upper = repr(float(curve.upper[j])) if curve.upper is not None else ""
            writer.writerow([j, repr(float(curve.values[j])), lower, upper])


def read_curve_csv(path: str) -> SurvivalCurve:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"curve file {path} has no rows")
    values = np.array([float(r["survival"]) for r in rows])
    grid = MonthGrid(len(rows) - 1)
    if rows[0]["lower"]:
        lower = np.array([float(r["lower"]) for r in rows])
        upper = np.array([float(r["upper"]) for r in rows])
        return SurvivalCurve(values, grid, lower, upper)
    return SurvivalCurve(values, grid)

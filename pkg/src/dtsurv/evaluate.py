"""Censoring-aware model evaluation: horizon classifiers, AUC, agreement,
correlation between models, and the Kaplan-Meier baseline.

A patient enters the h-month evaluation only when the h-month outcome is
certain: observed at least h months while alive, or died at any time. For
eligible patients the recorded duration decides the ground-truth label.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import Dataset, DtsurvError, MonthGrid, SurvivalRecord
from .learners.base import HazardModel
from .survival import predict_hazard_curve, survival_from_hazard

__all__ = [
    "HorizonPrediction",
    "EvalCell",
    "EvalReport",
    "SingleClassLabels",
    "PatientSetMismatch",
    "ZeroVariance",
    "eligible_for_horizon",
    "survived_label",
    "horizon_scores",
    "roc_auc",
    "agreement",
    "score_correlation",
    "kaplan_meier",
    "evaluate_models",
]

SURVIVE_THRESHOLD = 0.5  # score >= threshold predicts survival


class SingleClassLabels(DtsurvError):
    """AUC is undefined when every label is the same."""


class PatientSetMismatch(DtsurvError):
    """Two prediction lists cover different patients or horizons."""


class ZeroVariance(DtsurvError):
    """Correlation is undefined for a constant score vector."""


@dataclass(frozen=True)
class HorizonPrediction:
    """One model's survival score for one patient at one horizon."""

    patient_id: str
    horizon: int
    score: float

    @property
    def predicted_survives(self) -> bool:
        return self.score >= SURVIVE_THRESHOLD


def eligible_for_horizon(r: SurvivalRecord, h: int) -> bool:
    """True when the patient's h-month outcome is known despite censoring."""
    if h < 0:
        raise ValueError(f"horizon must be >= 0, got {h}")
    return r.event or r.duration_months >= h


def survived_label(r: SurvivalRecord, h: int) -> bool:
    """Ground truth for eligible patients: observed for at least h months."""
    return r.duration_months >= h


def horizon_scores(
    m: HazardModel,
    test: Dataset,
    grid: MonthGrid,
    horizons: Sequence[int] = (6, 12, 60),
) -> dict[int, list[HorizonPrediction]]:
    """Survival-curve values at each horizon for every eligible test patient."""
    if any(h > grid.horizon for h in horizons):
        raise ValueError(f"horizons {horizons} exceed the grid horizon {grid.horizon}")
    out: dict[int, list[HorizonPrediction]] = {h: [] for h in horizons}
    for r in test:
        wanted = [h for h in horizons if eligible_for_horizon(r, h)]
        if not wanted:
            continue
        curve = survival_from_hazard(predict_hazard_curve(m, r.covariates, grid))
        for h in wanted:
            out[h].append(HorizonPrediction(r.patient_id, h, curve.at(h)))
    return out


def roc_auc(scores: Sequence[float], labels: Sequence[bool]) -> float:
    """Probability a random positive outranks a random negative; ties count half.

    Computed by the rank statistic in exact integer arithmetic, so the result
    equals the brute-force pairwise count to the last bit.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be equal-length vectors")
    if not np.all(np.isfinite(scores)):
        raise ValueError("scores must be finite")
    n = scores.size
    n_pos = int(labels.sum())
    n_neg = n - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassLabels(f"labels contain a single class ({n_pos} of {n} positive)")

    order = np.argsort(scores, kind="stable")
    sorted_scores = scores[order]
    sorted_pos = labels[order].astype(np.int64)
    starts = np.concatenate([[0], np.nonzero(np.diff(sorted_scores))[0] + 1])
    group_pos = np.add.reduceat(sorted_pos, starts)
    group_sizes = np.diff(np.concatenate([starts, [n]]))
    group_neg = group_sizes - group_pos
    negatives_below = np.concatenate([[0], np.cumsum(group_neg)[:-1]])

    concordant = int(np.sum(group_pos * negatives_below))
    tied = int(np.sum(group_pos * group_neg))
    return (2 * concordant + tied) / (2 * n_pos * n_neg)


def _aligned_scores(
    a: Sequence[HorizonPrediction], b: Sequence[HorizonPrediction]
) -> tuple[np.ndarray, np.ndarray]:
    if {p.horizon for p in a} != {p.horizon for p in b}:
        raise PatientSetMismatch("prediction lists cover different horizons")
    by_id_a = {p.patient_id: p.score for p in a}
    by_id_b = {p.patient_id: p.score for p in b}
    if by_id_a.keys() != by_id_b.keys() or len(by_id_a) != len(a) or len(by_id_b) != len(b):
        raise PatientSetMismatch("prediction lists cover different patients")
    ids = sorted(by_id_a)
    return (
        np.array([by_id_a[i] for i in ids]),
        np.array([by_id_b[i] for i in ids]),
    )


def agreement(a: Sequence[HorizonPrediction], b: Sequence[HorizonPrediction]) -> float:
    """Fraction of patients whose thresholded verdicts coincide."""
    sa, sb = _aligned_scores(a, b)
    return float(np.mean((sa >= SURVIVE_THRESHOLD) == (sb >= SURVIVE_THRESHOLD)))


def score_correlation(a: Sequence[HorizonPrediction], b: Sequence[HorizonPrediction]) -> float:
    """Pearson correlation of the two models' score vectors."""
    sa, sb = _aligned_scores(a, b)
    da = sa - sa.mean()
    db = sb - sb.mean()
    var_a = float(da @ da)
    var_b = float(db @ db)
    if var_a == 0.0 or var_b == 0.0:
        raise ZeroVariance("a score vector is constant; correlation undefined")
    return float((da @ db) / np.sqrt(var_a * var_b))


def kaplan_meier(
    durations: Sequence[int],
    events: Sequence[bool],
    horizon: int | None = None,
) -> np.ndarray:
    """Product-limit survival estimate at integer months 0..horizon.

    Within a month, deaths are processed before censorings: both count in
    that month's risk set. Beyond the last observed duration the estimate
    stays flat.
    """
    durations = np.asarray(durations, dtype=np.int64)
    events = np.asarray(events, dtype=bool)
    if durations.size == 0:
        raise ValueError("need at least one observation")
    if np.any(durations < 0):
        raise ValueError("durations must be >= 0")
    last = int(durations.max())
    horizon = last if horizon is None else horizon

    bins = max(horizon, last) + 1
    leaving = np.bincount(durations, minlength=bins).astype(np.float64)
    deaths = np.bincount(durations, weights=events.astype(np.float64), minlength=bins)
    at_risk = durations.size - np.concatenate([[0.0], np.cumsum(leaving)[:-1]])
    hazard = np.divide(deaths, at_risk, out=np.zeros_like(deaths), where=at_risk > 0)
    return np.cumprod(1.0 - hazard)[: horizon + 1]


@dataclass(frozen=True)
class EvalCell:
    model: str
    horizon: int
    metric: str
    value: float | None
    n: int


@dataclass
class EvalReport:
    """Flat metric table; one cell per (model, horizon, metric)."""

    cells: list[EvalCell]

    def write_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["model", "horizon", "metric", "value", "n"])
            for c in self.cells:
                value = "NA" if c.value is None else repr(float(c.value))
                writer.writerow([c.model, c.horizon, c.metric, value, c.n])


def evaluate_models(
    models: Mapping[str, HazardModel],
    test: Dataset,
    grid: MonthGrid,
    horizons: Sequence[int] = (6, 12, 60),
) -> EvalReport:
    """AUC per model and horizon; agreement/correlation for model pairs.

    AUC cells are NA when the eligible patients carry a single label class.
    """
    if not models:
        raise ValueError("need at least one model")
    labels_by_id = {r.patient_id: r for r in test}
    predictions = {name: horizon_scores(m, test, grid, horizons) for name, m in models.items()}

    cells: list[EvalCell] = []
    for name, by_horizon in predictions.items():
        for h in horizons:
            preds = by_horizon[h]
            labels = [survived_label(labels_by_id[p.patient_id], h) for p in preds]
            try:
                auc = roc_auc([p.score for p in preds], labels) if preds else None
            except SingleClassLabels:
                auc = None
            cells.append(EvalCell(name, h, "auc", auc, len(preds)))

    names = list(models)
    for i, name_a in enumerate(names):
        for name_b in names[i + 1 :]:
            pair = f"{name_a}|{name_b}"
            for h in horizons:
                a, b = predictions[name_a][h], predictions[name_b][h]
                if not a:
                    continue
                cells.append(EvalCell(pair, h, "agreement", agreement(a, b), len(a)))
                try:
                    corr = score_correlation(a, b)
                except ZeroVariance:
                    corr = None
                cells.append(EvalCell(pair, h, "correlation", corr, len(a)))
    return EvalReport(cells)

"""Synthetic censored cohorts with analytic ground truth.

Each group carries a known per-month hazard, so the exact survival curve
and the best achievable horizon AUC are computable in closed form. All
quantitative acceptance checks run against cohorts drawn from these specs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .core import Dataset, DtsurvError, FeatureSchema, FeatureVector, MonthGrid, SurvivalRecord
from .survival import SurvivalCurve

__all__ = [
    "ConstantHazard",
    "DiscreteWeibullHazard",
    "TableHazard",
    "GroupSpec",
    "Censoring",
    "SyntheticSpec",
    "UnknownGroup",
    "DegenerateSpec",
    "GROUP_FEATURE",
    "generate",
    "oracle_survival",
    "oracle_horizon_auc",
]

GROUP_FEATURE = "group_id"


class UnknownGroup(DtsurvError):
    """The named group is not part of the spec."""


class DegenerateSpec(DtsurvError):
    """The spec cannot distinguish groups at the requested horizon."""


@dataclass(frozen=True)
class ConstantHazard:
    """Same death probability every month (geometric survival)."""

    p: float

    def at(self, t: int) -> float:
        return self.p


@dataclass(frozen=True)
class DiscreteWeibullHazard:
    """Hazard 1 - q^((t+1)^beta - t^beta); survival past t is q^((t+1)^beta)."""

    q: float
    beta: float

    def at(self, t: int) -> float:
        return 1.0 - self.q ** ((t + 1) ** self.beta - t**self.beta)


@dataclass(frozen=True)
class TableHazard:
    """Arbitrary per-month hazards; the last value repeats past the table."""

    values: tuple[float, ...]

    def at(self, t: int) -> float:
        return self.values[min(t, len(self.values) - 1)]


HazardFunction = ConstantHazard | DiscreteWeibullHazard | TableHazard


@dataclass(frozen=True)
class GroupSpec:
    name: str
    weight: float
    hazard: HazardFunction
    features: Mapping[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class Censoring:
    """Independent censoring: per-month geometric rate and/or a fixed cutoff."""

    kind: str = "none"  # none | geometric | cutoff
    rate: float = 0.0  # geometric per-month probability
    cutoff: int = 0  # administrative cutoff month

    def __post_init__(self) -> None:
        if self.kind not in ("none", "geometric", "cutoff"):
            raise ValueError(f"unknown censoring kind {self.kind!r}")
        if self.kind == "geometric" and not 0.0 <= self.rate <= 1.0:
            raise ValueError(f"geometric rate must be in [0, 1], got {self.rate}")
        if self.kind == "cutoff" and self.cutoff < 0:
            raise ValueError(f"cutoff month must be >= 0, got {self.cutoff}")


@dataclass(frozen=True)
class SyntheticSpec:
    groups: tuple[GroupSpec, ...]
    censoring: Censoring = Censoring()
    horizon: int = 60
    n_patients: int = 1000
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.groups:
            raise ValueError("need at least one group")
        if abs(sum(g.weight for g in self.groups) - 1.0) > 1e-9:
            raise ValueError("group weights must sum to 1")
        if any(g.weight < 0 for g in self.groups):
            raise ValueError("group weights must be >= 0")
        names = [g.name for g in self.groups]
        if len(set(names)) != len(names):
            raise ValueError("duplicate group names")
        first = tuple(self.groups[0].features)
        for g in self.groups:
            if tuple(g.features) != first:
                raise ValueError("all groups must declare the same feature names")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.n_patients < 1:
            raise ValueError(f"n_patients must be >= 1, got {self.n_patients}")
        for g in self.groups:
            for t in range(self.horizon + 1):
                if not 0.0 <= g.hazard.at(t) <= 1.0:
                    raise ValueError(f"group {g.name!r} hazard at month {t} outside [0, 1]")

    def schema(self) -> FeatureSchema:
        return FeatureSchema(tuple(self.groups[0].features) + (GROUP_FEATURE,))

    def group(self, name: str) -> GroupSpec:
        for g in self.groups:
            if g.name == name:
                return g
        raise UnknownGroup(f"no group named {name!r}")

    def grid(self) -> MonthGrid:
        return MonthGrid(self.horizon)


def _hazard_array(hazard: HazardFunction, horizon: int) -> np.ndarray:
    return np.array([hazard.at(t) for t in range(horizon + 1)], dtype=np.float64)


def _month_distribution(hazards: np.ndarray) -> np.ndarray:
    """P(month 0..H) plus sentinel H+1 for 'past the horizon'."""
    survive = 1.0 - hazards
    alive_before = np.concatenate([[1.0], np.cumprod(survive)[:-1]])
    pmf = hazards * alive_before
    tail = float(np.prod(survive))
    dist = np.concatenate([pmf, [tail]])
    return dist / dist.sum()


def generate(spec: SyntheticSpec) -> Dataset:
    """Draw a cohort: group, death month, censoring month, then censor.

    Death months are drawn from the exact distribution the hazard implies
    (equivalent to a month-by-month Bernoulli chain). Everyone still alive
    at the horizon is censored there, so durations never exceed it. A death
    and a censoring in the same month record a death.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n_patients
    horizon = spec.horizon
    sentinel = horizon + 1

    weights = np.array([g.weight for g in spec.groups])
    group_ids = rng.choice(len(spec.groups), size=n, p=weights / weights.sum())

    death = np.empty(n, dtype=np.int64)
    for gi, g in enumerate(spec.groups):
        mask = group_ids == gi
        if not mask.any():
            continue
        dist = _month_distribution(_hazard_array(g.hazard, horizon))
        death[mask] = rng.choice(sentinel + 1, size=int(mask.sum()), p=dist)

    if spec.censoring.kind == "geometric":
        censor_hazards = np.full(horizon + 1, spec.censoring.rate)
        censor = rng.choice(sentinel + 1, size=n, p=_month_distribution(censor_hazards))
    elif spec.censoring.kind == "cutoff":
        censor = np.full(n, spec.censoring.cutoff, dtype=np.int64)
    else:
        censor = np.full(n, sentinel, dtype=np.int64)
    limit = np.minimum(censor, horizon)

    durations = np.minimum(death, limit)
    events = death <= limit

    schema = spec.schema()
    records = []
    width = len(str(n - 1))
    for i in range(n):
        g = spec.groups[group_ids[i]]
        values = np.array([*g.features.values(), float(group_ids[i])])
        records.append(
            SurvivalRecord(
                patient_id=f"synth-{i:0{width}d}",
                covariates=FeatureVector(schema, values),
                duration_months=int(durations[i]),
                event=bool(events[i]),
            )
        )
    return Dataset(schema, records)


def oracle_survival(spec: SyntheticSpec, group: str) -> SurvivalCurve:
    """Exact survival curve of a group: running product of 1 - hazard."""
    g = spec.group(group)
    hazards = _hazard_array(g.hazard, spec.horizon)
    return SurvivalCurve(np.cumprod(1.0 - hazards), spec.grid())


def oracle_horizon_auc(spec: SyntheticSpec, h: int) -> float:
    """Best achievable AUC at horizon h when scoring patients by their group.

    Enumerates the group-by-outcome mixture exactly: a patient of group g is
    a positive with the group's probability of living at least h months, and
    every group member shares the score S*(h).
    """
    if len(spec.groups) < 2:
        raise DegenerateSpec("need at least two groups")
    if h > spec.horizon:
        raise ValueError(f"horizon {h} exceeds spec horizon {spec.horizon}")
    scores = []
    survive_mass = []
    for g in spec.groups:
        hazards = _hazard_array(g.hazard, spec.horizon)
        survival = np.cumprod(1.0 - hazards)
        scores.append(float(survival[h]))
        # alive at least h months: survived months 0..h-1
        survive_mass.append(float(np.prod(1.0 - hazards[:h])) if h > 0 else 1.0)
    if len(set(scores)) == 1:
        raise DegenerateSpec(f"all groups share the same survival at month {h}")

    weights = [g.weight for g in spec.groups]
    pos = [w * p for w, p in zip(weights, survive_mass)]
    neg = [w * (1.0 - p) for w, p in zip(weights, survive_mass)]
    pos_total, neg_total = sum(pos), sum(neg)
    if pos_total == 0.0 or neg_total == 0.0:
        raise DegenerateSpec(f"labels at month {h} are single-class")

    auc = 0.0
    for i, pi in enumerate(pos):
        for j, nj in enumerate(neg):
            if scores[i] > scores[j]:
                auc += pi * nj
            elif scores[i] == scores[j]:
                auc += 0.5 * pi * nj
    return auc / (pos_total * neg_total)

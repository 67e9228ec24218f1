"""Raw tabular records to numeric feature vectors.

Covers the whole ingestion contract: declarative row filters, one-hot
encoding of nominal columns with deterministic feature ordering, location
recoding through a :class:`~dtsurv.geo.GeoResolver`, and the CSV formats
for datasets and expanded datasets (UTF-8, comma-delimited, header row).
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .core import (
    Dataset,
    DatasetStats,
    DtsurvError,
    FeatureSchema,
    FeatureVector,
    MONTH_FEATURE,
    SurvivalRecord,
)
from .geo import GeoResolutionFailure, GeoResolver, GeoTriple
from .transform import ExpandedDataset, ExpandedRow

__all__ = [
    "Table",
    "FilterRule",
    "FilterRuleSet",
    "EncoderMap",
    "UnknownColumn",
    "EmptyColumn",
    "MissingColumn",
    "InvalidFieldValue",
    "normalize_name",
    "apply_filters",
    "fit_encoder",
    "encode_record",
    "read_table_csv",
    "write_dataset_csv",
    "read_dataset_csv",
    "write_expanded_csv",
    "read_expanded_csv",
    "expanded_csv_sink",
    "build_dataset",
    "GEO_FEATURES",
]

GEO_FEATURES = ("lat", "lng", "elevation")

TRUE_WORDS = frozenset({"1", "true", "yes", "dead", "t"})
FALSE_WORDS = frozenset({"0", "false", "no", "alive", "f"})


class UnknownColumn(DtsurvError):
    """A rule or encoder references a column the table does not have."""


class EmptyColumn(DtsurvError):
    """A nominal column has no non-blank values to enumerate."""


class MissingColumn(DtsurvError):
    """A record lacks a column the encoder requires."""


class InvalidFieldValue(DtsurvError):
    """A cell could not be parsed as its declared type."""

    def __init__(self, column: str, value: str, expected: str):
        super().__init__(f"column {column!r}: cannot read {value!r} as {expected}")
        self.column = column
        self.value = value


def normalize_name(column: str) -> str:
    """Lowercase, runs of non-alphanumerics to single underscores."""
    return re.sub(r"[^a-z0-9]+", "_", column.lower()).strip("_")


@dataclass(frozen=True)
class Table:
    """In-memory CSV: header plus rows of string cells."""

    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self) -> None:
        for r in self.rows:
            if len(r) != len(self.columns):
                raise ValueError(f"row width {len(r)} does not match header {len(self.columns)}")

    def __len__(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        try:
            return self.columns.index(name)
        except ValueError:
            raise UnknownColumn(f"table has no column {name!r}") from None

    def record(self, i: int) -> dict[str, str]:
        return dict(zip(self.columns, self.rows[i]))


def read_table_csv(path: str) -> Table:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty; expected a header row") from None
        return Table(tuple(header), tuple(tuple(row) for row in reader))


@dataclass(frozen=True)
class FilterRule:
    """One predicate: equals / not-equals / at-least / non-blank."""

    column: str
    op: str
    value: str = ""

    OPS = ("=", "!=", ">=", "nonblank")

    def __post_init__(self) -> None:
        if self.op not in self.OPS:
            raise ValueError(f"unknown filter op {self.op!r}; expected one of {self.OPS}")

    def matches(self, cell: str) -> bool:
        cell = cell.strip()
        if self.op == "=":
            return cell == self.value
        if self.op == "!=":
            return cell != self.value
        if self.op == "nonblank":
            return cell != ""
        try:  # >= compares numerically; unparseable cells fail the filter
            return float(cell) >= float(self.value)
        except ValueError:
            return False


@dataclass(frozen=True)
class FilterRuleSet:
    rules: tuple[FilterRule, ...] = ()


def apply_filters(table: Table, rules: FilterRuleSet) -> Table:
    """Rows satisfying every rule, original order preserved."""
    indices = [table.column_index(r.column) for r in rules.rules]
    kept = tuple(
        row
        for row in table.rows
        if all(rule.matches(row[i]) for rule, i in zip(rules.rules, indices))
    )
    return Table(table.columns, kept)


@dataclass(frozen=True)
class EncoderMap:
    """Fitted feature layout: nominal blocks, numeric pass-throughs, geo triple.

    Feature order is deterministic: nominal columns in declaration order
    (categories lexicographic within each block), then numeric columns in
    declaration order, then lat/lng/elevation when a geo column is set.
    """

    nominal: tuple[tuple[str, tuple[str, ...]], ...]
    numeric: tuple[str, ...]
    geo_column: str | None = None

    def feature_names(self) -> tuple[str, ...]:
        names: list[str] = []
        for column, categories in self.nominal:
            base = normalize_name(column)
            names.extend(f"{base}_{cat}" for cat in categories)
        names.extend(normalize_name(c) for c in self.numeric)
        if self.geo_column is not None:
            names.extend(GEO_FEATURES)
        return tuple(names)

    def schema(self) -> FeatureSchema:
        return FeatureSchema(self.feature_names())

    def raw_columns(self) -> tuple[str, ...]:
        cols = [c for c, _ in self.nominal] + list(self.numeric)
        if self.geo_column is not None:
            cols.append(self.geo_column)
        return tuple(cols)

    def decode_feature(self, feature_name: str) -> tuple[str, str | None]:
        """Inverse of feature naming: (source column, category or None)."""
        for column, categories in self.nominal:
            base = normalize_name(column)
            for cat in categories:
                if feature_name == f"{base}_{cat}":
                    return column, cat
        for column in self.numeric:
            if feature_name == normalize_name(column):
                return column, None
        if self.geo_column is not None and feature_name in GEO_FEATURES:
            return self.geo_column, feature_name
        raise KeyError(f"feature {feature_name!r} is not produced by this encoder")

    def to_json_dict(self) -> dict:
        return {
            "nominal": [[c, list(cats)] for c, cats in self.nominal],
            "numeric": list(self.numeric),
            "geo_column": self.geo_column,
        }

    @classmethod
    def from_json_dict(cls, obj: Mapping) -> "EncoderMap":
        return cls(
            nominal=tuple((c, tuple(cats)) for c, cats in obj["nominal"]),
            numeric=tuple(obj["numeric"]),
            geo_column=obj.get("geo_column"),
        )


def fit_encoder(
    table: Table,
    nominal_columns: Sequence[str],
    numeric_columns: Sequence[str],
    geo_column: str | None = None,
) -> EncoderMap:
    """Enumerate nominal categories and fix the numeric/geo layout.

    Categories are the sorted distinct non-blank values of each nominal
    column, so refitting on any row permutation of the table yields the
    identical map.
    """
    declared = list(nominal_columns) + list(numeric_columns) + ([geo_column] if geo_column else [])
    if len(set(declared)) != len(declared):
        raise ValueError("encoder columns must be disjoint")
    for column in declared:
        table.column_index(column)

    nominal: list[tuple[str, tuple[str, ...]]] = []
    for column in nominal_columns:
        i = table.column_index(column)
        categories = sorted({row[i].strip() for row in table.rows} - {""})
        if not categories:
            raise EmptyColumn(f"nominal column {column!r} has no values")
        nominal.append((column, tuple(categories)))
    return EncoderMap(tuple(nominal), tuple(numeric_columns), geo_column)


def encode_record(
    m: EncoderMap,
    record: Mapping[str, str],
    geo: GeoResolver | None = None,
) -> FeatureVector:
    """Raw cells to a schema-ordered vector.

    Known categories set exactly one 1 in their block; unseen or blank
    values leave the whole block zero. Geo failures propagate from the
    resolver.
    """
    for column in m.raw_columns():
        if column not in record:
            raise MissingColumn(f"record is missing column {column!r}")

    values: list[float] = []
    for column, categories in m.nominal:
        cell = str(record[column]).strip()
        values.extend(1.0 if cell == cat else 0.0 for cat in categories)
    for column in m.numeric:
        cell = str(record[column]).strip()
        try:
            values.append(float(cell))
        except ValueError:
            raise InvalidFieldValue(column, cell, "a number") from None
    if m.geo_column is not None:
        if geo is None:
            raise GeoResolutionFailure(f"no resolver configured for column {m.geo_column!r}")
        triple: GeoTriple = geo.resolve(str(record[m.geo_column]).strip())
        values.extend([triple.lat, triple.lng, triple.elevation])
    return FeatureVector(m.schema(), np.array(values))


def _parse_event(cell: str, column: str) -> bool:
    word = cell.strip().lower()
    if word in TRUE_WORDS:
        return True
    if word in FALSE_WORDS:
        return False
    raise InvalidFieldValue(column, cell, "an event flag (0/1, true/false, alive/dead)")


def build_dataset(
    table: Table,
    m: EncoderMap,
    duration_column: str,
    event_column: str,
    id_column: str | None = None,
    geo: GeoResolver | None = None,
) -> tuple[Dataset, list[tuple[int, str]]]:
    """Encode a filtered table into a Dataset.

    Rows whose location cannot be resolved are skipped, not fatal; the
    second return value reports (row index, reason) for each skip.
    """
    table.column_index(duration_column)
    table.column_index(event_column)
    if id_column is not None:
        table.column_index(id_column)

    skipped: list[tuple[int, str]] = []
    records: list[SurvivalRecord] = []
    schema = m.schema()
    for i in range(len(table)):
        record = table.record(i)
        patient_id = record[id_column] if id_column else f"row-{i}"
        duration_cell = record[duration_column].strip()
        try:
            duration = int(float(duration_cell))
        except ValueError:
            raise InvalidFieldValue(duration_column, duration_cell, "months") from None
        event = _parse_event(record[event_column], event_column)
        try:
            vector = encode_record(m, record, geo)
        except GeoResolutionFailure as exc:
            skipped.append((i, str(exc)))
            continue
        records.append(SurvivalRecord(patient_id, FeatureVector(schema, vector.values), duration, event))
    return Dataset(schema, records), skipped


# ---------------------------------------------------------------------------
# CSV formats for encoded datasets and expanded datasets


def write_dataset_csv(d: Dataset, path: str) -> None:
    """Columns: patient_id, duration_months, event, then the schema features."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["patient_id", "duration_months", "event", *d.schema.names])
        for r in d:
            writer.writerow(
                [r.patient_id, r.duration_months, int(r.event)]
                + [repr(float(v)) for v in r.covariates.values]
            )


def read_dataset_csv(path: str) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        if header[:3] != ["patient_id", "duration_months", "event"]:
            raise ValueError(f"{path} is not a dataset CSV (header {header[:3]})")
        schema = FeatureSchema(tuple(header[3:]))
        records = [
            SurvivalRecord(
                patient_id=row[0],
                covariates=FeatureVector(schema, np.array([float(v) for v in row[3:]])),
                duration_months=int(row[1]),
                event=bool(int(row[2])),
            )
            for row in reader
        ]
    return Dataset(schema, records)


def write_expanded_csv(e: ExpandedDataset, path: str) -> None:
    """Columns: patient_id, the expanded schema (month last), target."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["patient_id", *e.schema.names, "target"])
        for i in range(len(e)):
            row = e.matrix[i]
            writer.writerow(
                [e.patient_ids[i]]
                + [repr(float(v)) for v in row[:-1]]
                + [int(row[-1]), int(e.targets[i])]
            )


class expanded_csv_sink:
    """Row consumer for :func:`dtsurv.transform.expand_streaming` writing CSV."""

    def __init__(self, path: str, schema: FeatureSchema):
        self._fh = open(path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._fh)
        self._writer.writerow(["patient_id", *schema.names, "target"])

    def __call__(self, rows: list[ExpandedRow]) -> None:
        for r in rows:
            self._writer.writerow(
                [r.patient_id]
                + [repr(float(v)) for v in r.covariates.values]
                + [r.month, int(r.target)]
            )

    def close(self) -> None:
        self._fh.close()

    def __enter__(self) -> "expanded_csv_sink":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def read_expanded_csv(path: str) -> ExpandedDataset:
    """Rebuild the expanded dataset, recovering the source-dataset census.

    Each patient's block is contiguous with months ascending from 0; the
    block length and final target recover the original duration and event.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path} is empty") from None
        if header[0] != "patient_id" or header[-1] != "target" or header[-2] != MONTH_FEATURE:
            raise ValueError(f"{path} is not an expanded-dataset CSV")
        schema = FeatureSchema(tuple(header[1:-1]))
        ids: list[str] = []
        values: list[list[float]] = []
        targets: list[bool] = []
        for row in reader:
            ids.append(row[0])
            values.append([float(v) for v in row[1:-1]])
            targets.append(bool(int(row[-1])))

    matrix = np.array(values) if values else np.zeros((0, len(schema)))
    target_arr = np.array(targets, dtype=bool)

    histogram: dict[int, int] = {}
    n_events = 0
    order: list[str] = []
    last_month: dict[str, int] = {}
    last_target: dict[str, bool] = {}
    for i, pid in enumerate(ids):
        if pid not in last_month:
            order.append(pid)
        last_month[pid] = int(matrix[i, -1])
        last_target[pid] = bool(target_arr[i])
    for pid in order:
        d = last_month[pid]
        histogram[d] = histogram.get(d, 0) + 1
        n_events += int(last_target[pid])
    stats = DatasetStats(
        n_patients=len(order),
        n_events=n_events,
        n_censored=len(order) - n_events,
        max_duration=max(last_month.values(), default=0),
        duration_histogram=histogram,
    )
    return ExpandedDataset(schema, ids, matrix, target_arr, stats)

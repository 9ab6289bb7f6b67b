"""Columnar training set with pre-sorted continuous domains.

Discrete columns hold an index into the attribute's declared domain.
Continuous columns hold an index into the ascending table of distinct
values observed for that attribute, so that sorting a node's cases only
needs integer comparisons and threshold lookups are a binary search.
Unknown values are stored as ``UNKNOWN`` (-1) in both column kinds.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

UNKNOWN = -1
UNKNOWN_TOKEN = "?"

DISCRETE = "discrete"
CONTINUOUS = "continuous"


class SchemaError(ValueError):
    pass


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class AttributeSchema:
    name: str
    kind: str
    domain: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (DISCRETE, CONTINUOUS):
            raise SchemaError(f"unknown attribute kind {self.kind!r}")
        if self.kind == DISCRETE:
            if not self.domain:
                raise SchemaError(f"discrete attribute {self.name!r} has an empty domain")
            if len(set(self.domain)) != len(self.domain):
                raise SchemaError(f"duplicate values in domain of {self.name!r}")
            if UNKNOWN_TOKEN in self.domain:
                raise SchemaError(f"domain of {self.name!r} contains the unknown marker")
        elif self.domain:
            raise SchemaError(f"continuous attribute {self.name!r} cannot declare a domain")

    @property
    def is_continuous(self) -> bool:
        return self.kind == CONTINUOUS


@dataclass(frozen=True)
class Schema:
    attributes: tuple[AttributeSchema, ...]
    class_domain: tuple[str, ...]

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError("attribute names must be unique")
        if not self.class_domain:
            raise SchemaError("empty class domain")
        if len(set(self.class_domain)) != len(self.class_domain):
            raise SchemaError("duplicate class labels")

    def to_text(self) -> str:
        lines = []
        for a in self.attributes:
            if a.is_continuous:
                lines.append(f"{a.name}: continuous")
            else:
                lines.append(f"{a.name}: discrete {','.join(a.domain)}")
        lines.append(f"class: {','.join(self.class_domain)}")
        return "\n".join(lines) + "\n"


def _split_values(text: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in text.split(",") if v.strip())


def load_schema(schema_text: str) -> Schema:
    """Parse ``name: discrete v1,v2`` / ``name: continuous`` lines ending with ``class: c1,c2``."""
    attributes = []
    class_domain = None
    for lineno, raw in enumerate(schema_text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if class_domain is not None:
            raise SchemaError(f"line {lineno}: class must be declared last")
        name, sep, rest = line.partition(":")
        name = name.strip()
        if not sep or not name:
            raise SchemaError(f"line {lineno}: expected 'name: kind ...'")
        rest = rest.strip()
        if name == "class":
            class_domain = _split_values(rest)
            if not class_domain:
                raise SchemaError(f"line {lineno}: empty class domain")
            continue
        kind, _, values = rest.partition(" ")
        if kind == CONTINUOUS:
            if values.strip():
                raise SchemaError(f"line {lineno}: continuous attribute takes no values")
            attributes.append(AttributeSchema(name, CONTINUOUS))
        elif kind == DISCRETE:
            attributes.append(AttributeSchema(name, DISCRETE, _split_values(values)))
        else:
            raise SchemaError(f"line {lineno}: unknown kind keyword {kind!r}")
    if class_domain is None:
        raise SchemaError("missing class declaration")
    return Schema(tuple(attributes), class_domain)


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Immutable columnar store; safe to read from any number of threads."""

    schema: Schema
    columns: tuple[np.ndarray, ...]
    class_column: np.ndarray
    sorted_values: tuple[np.ndarray | None, ...]

    @property
    def attributes(self) -> tuple[AttributeSchema, ...]:
        return self.schema.attributes

    @property
    def class_domain(self) -> tuple[str, ...]:
        return self.schema.class_domain

    @property
    def n_classes(self) -> int:
        return len(self.schema.class_domain)

    @property
    def n_attributes(self) -> int:
        return len(self.schema.attributes)

    @property
    def case_count(self) -> int:
        return len(self.class_column)

    def __len__(self):
        return self.case_count

    def is_continuous(self, attr: int) -> bool:
        return self.schema.attributes[attr].is_continuous

    def decode(self, attr: int) -> np.ndarray:
        """Raw values of a continuous column, NaN where unknown."""
        col = self.columns[attr]
        table = self.sorted_values[attr]
        out = np.full(len(col), np.nan)
        known = col != UNKNOWN
        out[known] = table[col[known]]
        return out

    def check(self) -> None:
        n = self.case_count
        if len(self.columns) != self.n_attributes:
            raise DataError("column count does not match schema")
        if np.any(self.class_column < 0) or np.any(self.class_column >= self.n_classes):
            raise DataError("class column holds unknown or out-of-range entries")
        for i, (a, col) in enumerate(zip(self.attributes, self.columns)):
            if len(col) != n:
                raise DataError(f"column {a.name!r} has {len(col)} entries, expected {n}")
            hi = len(self.sorted_values[i]) if a.is_continuous else len(a.domain)
            if np.any((col < UNKNOWN) | (col >= hi)):
                raise DataError(f"column {a.name!r} holds out-of-range indices")
            if a.is_continuous and np.any(np.diff(self.sorted_values[i]) <= 0):
                raise DataError(f"sorted values of {a.name!r} are not strictly ascending")

    @classmethod
    def from_raw(cls, schema: Schema, raw_columns: Sequence, classes) -> "TrainingSet":
        """Build from per-attribute raw columns.

        Continuous columns are float arrays with NaN for unknown; discrete
        columns are integer domain indices with ``UNKNOWN`` for unknown.
        ``classes`` holds class indices.
        """
        columns, tables = [], []
        for a, raw in zip(schema.attributes, raw_columns, strict=True):
            if a.is_continuous:
                raw = np.asarray(raw, dtype=np.float64)
                known = ~np.isnan(raw)
                table, inverse = np.unique(raw[known], return_inverse=True)
                col = np.full(len(raw), UNKNOWN, dtype=np.int32)
                col[known] = inverse
                columns.append(col)
                tables.append(table)
            else:
                columns.append(np.ascontiguousarray(raw, dtype=np.int32))
                tables.append(None)
        ts = cls(schema, tuple(columns), np.ascontiguousarray(classes, dtype=np.int32), tuple(tables))
        for col in ts.columns:
            col.flags.writeable = False
        ts.class_column.flags.writeable = False
        ts.check()
        return ts


def load_data(schema: Schema, csv_text: str) -> TrainingSet:
    rows = [r for r in csv.reader(io.StringIO(csv_text)) if r and any(f.strip() for f in r)]
    width = len(schema.attributes) + 1
    for lineno, row in enumerate(rows, 1):
        if len(row) != width:
            raise DataError(f"row {lineno}: expected {width} fields, got {len(row)}")

    fields = [[f.strip() for f in col] for col in zip(*rows)] if rows else [[] for _ in range(width)]
    raw_columns = []
    for a, values in zip(schema.attributes, fields):
        if a.is_continuous:
            raw_columns.append(_parse_continuous(a, values))
        else:
            index = {v: k for k, v in enumerate(a.domain)}
            index[UNKNOWN_TOKEN] = UNKNOWN
            try:
                raw_columns.append(np.fromiter((index[v] for v in values), np.int32, len(values)))
            except KeyError as e:
                row = values.index(e.args[0]) + 1
                raise DataError(f"row {row}: value {e.args[0]!r} not in domain of {a.name!r}") from None

    class_index = {v: k for k, v in enumerate(schema.class_domain)}
    class_values = fields[-1]
    try:
        classes = np.fromiter((class_index[v] for v in class_values), np.int32, len(class_values))
    except KeyError as e:
        row = class_values.index(e.args[0]) + 1
        raise DataError(f"row {row}: invalid class value {e.args[0]!r}") from None
    return TrainingSet.from_raw(schema, raw_columns, classes)


def _parse_continuous(a: AttributeSchema, values: list[str]) -> np.ndarray:
    out = np.empty(len(values))
    for k, v in enumerate(values):
        if v == UNKNOWN_TOKEN:
            out[k] = np.nan
            continue
        try:
            x = float(v)
        except ValueError:
            raise DataError(f"row {k + 1}: unparsable number {v!r} for {a.name!r}") from None
        if not math.isfinite(x):
            raise DataError(f"row {k + 1}: non-finite value {v!r} for {a.name!r}")
        out[k] = x
    return out


@dataclass(frozen=True, eq=False)
class CaseSubset:
    """Weighted case ids owned by one decision node."""

    case_ids: np.ndarray
    weights: np.ndarray
    total_weight: float

    @classmethod
    def of(cls, case_ids, weights) -> "CaseSubset":
        case_ids = np.ascontiguousarray(case_ids, dtype=np.int64)
        weights = np.ascontiguousarray(weights, dtype=np.float64)
        return cls(case_ids, weights, float(weights.sum()))

    def __len__(self):
        return len(self.case_ids)

    def check(self) -> None:
        if len(self.case_ids) != len(self.weights):
            raise DataError("case ids and weights differ in length")
        if np.any(self.weights <= 0):
            raise DataError("case weights must be positive")
        if len(np.unique(self.case_ids)) != len(self.case_ids):
            raise DataError("duplicate case id in subset")
        if not math.isclose(self.total_weight, float(self.weights.sum()), rel_tol=1e-9, abs_tol=1e-12):
            raise DataError("total weight does not match weights")


def root_subset(ts: TrainingSet) -> CaseSubset:
    if ts.case_count == 0:
        raise DataError("empty training set")
    n = ts.case_count
    return CaseSubset(np.arange(n, dtype=np.int64), np.ones(n), float(n))

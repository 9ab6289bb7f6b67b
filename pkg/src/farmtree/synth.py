"""Seeded synthetic training sets.

Labels come from an ordered list of rules, each a conjunction of two or
three attribute conditions (continuous thresholds or discrete value
subsets); the first rule that fires assigns its class and cases matching no
rule get class 0. A fraction of labels is then replaced at random, and
attribute values are blanked to unknown at ``unknown_rate``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dataset import CONTINUOUS, DISCRETE, UNKNOWN, UNKNOWN_TOKEN, AttributeSchema, Schema, TrainingSet


@dataclass(frozen=True)
class SyntheticSpec:
    case_count: int
    continuous_attrs: int = 6
    discrete_attrs: int = 3
    classes: int = 2
    unknown_rate: float = 0.0
    seed: int = 0
    noise: float = 0.05
    discrete_values: int = 5
    n_rules: int = 8

    def __post_init__(self):
        if self.case_count < 0:
            raise ValueError("case_count must be nonnegative")
        if self.continuous_attrs + self.discrete_attrs < 1:
            raise ValueError("need at least one attribute")
        if self.classes < 2:
            raise ValueError("need at least two classes")
        if not 0 <= self.unknown_rate < 1:
            raise ValueError("unknown_rate must lie in [0, 1)")
        if not 0 <= self.noise <= 1:
            raise ValueError("noise must lie in [0, 1]")

    def schema(self) -> Schema:
        attrs = [AttributeSchema(f"c{i}", CONTINUOUS) for i in range(self.continuous_attrs)]
        values = tuple(f"v{k}" for k in range(self.discrete_values))
        attrs += [AttributeSchema(f"d{i}", DISCRETE, values) for i in range(self.discrete_attrs)]
        return Schema(tuple(attrs), tuple(f"k{c}" for c in range(self.classes)))


def _rules(spec: SyntheticSpec, rng: np.random.Generator):
    m = spec.continuous_attrs + spec.discrete_attrs
    rules = []
    for j in range(spec.n_rules):
        conds = []
        for a in rng.choice(m, size=min(m, int(rng.integers(2, 4))), replace=False):
            if a < spec.continuous_attrs:
                conds.append((int(a), "le" if rng.random() < 0.5 else "gt", float(rng.uniform(20, 80))))
            else:
                k = int(rng.integers(1, spec.discrete_values))
                conds.append((int(a), "in", rng.choice(spec.discrete_values, size=k, replace=False)))
        rules.append((conds, 1 + j % (spec.classes - 1) if j % spec.classes else 0))
    return rules


def generate_raw(spec: SyntheticSpec):
    """Raw columns (NaN / ``UNKNOWN`` for missing) and class indices."""
    rng = np.random.default_rng(spec.seed)
    n = spec.case_count
    cont = [np.round(rng.uniform(0, 100, n), 2) for _ in range(spec.continuous_attrs)]
    disc = [rng.integers(0, spec.discrete_values, n).astype(np.int32) for _ in range(spec.discrete_attrs)]
    columns = cont + disc

    labels = np.zeros(n, dtype=np.int32)
    unlabeled = np.ones(n, dtype=bool)
    for conds, cls in _rules(spec, rng):
        fires = unlabeled.copy()
        for a, op, arg in conds:
            x = columns[a]
            if op == "le":
                fires &= x <= arg
            elif op == "gt":
                fires &= x > arg
            else:
                fires &= np.isin(x, arg)
        labels[fires] = cls
        unlabeled &= ~fires
    flip = rng.random(n) < spec.noise
    labels[flip] = rng.integers(0, spec.classes, int(flip.sum()))

    if spec.unknown_rate > 0:
        for i, col in enumerate(columns):
            blank = rng.random(n) < spec.unknown_rate
            col = col.astype(np.float64 if i < spec.continuous_attrs else np.int32)
            col[blank] = np.nan if i < spec.continuous_attrs else UNKNOWN
            columns[i] = col
    return columns, labels


def generate(spec: SyntheticSpec) -> TrainingSet:
    columns, labels = generate_raw(spec)
    return TrainingSet.from_raw(spec.schema(), columns, labels)


def dataset_csv(spec: SyntheticSpec) -> str:
    schema = spec.schema()
    columns, labels = generate_raw(spec)
    fields = []
    for a, col in zip(schema.attributes, columns):
        if a.is_continuous:
            fields.append([UNKNOWN_TOKEN if x != x else repr(float(x)) for x in col.tolist()])
        else:
            fields.append([UNKNOWN_TOKEN if v == UNKNOWN else a.domain[v] for v in col.tolist()])
    fields.append([schema.class_domain[c] for c in labels.tolist()])
    return "".join(",".join(row) + "\n" for row in zip(*fields))


def write_dataset(spec: SyntheticSpec, schema_path, data_path) -> None:
    Path(schema_path).write_text(spec.schema().to_text(), encoding="utf-8")
    Path(data_path).write_text(dataset_csv(spec), encoding="utf-8")

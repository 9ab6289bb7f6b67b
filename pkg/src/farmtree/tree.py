"""Sequential C4.5-style tree growth, split into the three per-node phases
(``split_pre``, ``split_att``, ``split_post``) that the parallel strategies
schedule independently."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import _kernels
from ._kernels import TIE_EPS
from .dataset import UNKNOWN, CaseSubset, TrainingSet, root_subset

DISCRETE_ALL_VALUES = "discreteAllValues"
CONTINUOUS_THRESHOLD = "continuousThreshold"
LABEL_TIE_REL = 1e-9


class SplitError(RuntimeError):
    """A node phase was invoked out of order or twice."""


@dataclass(frozen=True)
class GrowParams:
    min_cases: float = 2.0
    boundary: bool = True
    counting_sort: bool = False


@dataclass(frozen=True, eq=False)
class ClassDistribution:
    freq: np.ndarray
    total: float

    def majority(self) -> int:
        # fractional weights make exact ties come out a few ulps apart, so
        # near-maximal counts tie and the lowest class index wins
        top = self.freq.max()
        return int(np.flatnonzero(self.freq >= top - LABEL_TIE_REL * max(self.total, 1.0))[0])


@dataclass(frozen=True)
class GainResult:
    gain: float
    local_threshold: float | None = None


@dataclass(frozen=True)
class SplitTest:
    attribute: int
    kind: str
    threshold: float | None = None
    # position of ``threshold`` in the attribute's sorted value table
    threshold_rank: int | None = None

    def n_outcomes(self, ts: TrainingSet) -> int:
        if self.kind == CONTINUOUS_THRESHOLD:
            return 2
        return len(ts.attributes[self.attribute].domain)


class DecisionNode:
    __slots__ = (
        "subset", "considered", "depth", "distribution", "leaf_class",
        "test", "children", "gain_slots", "att_tasks",
    )

    def __init__(self, subset: CaseSubset, considered: tuple[int, ...], depth: int = 1):
        self.subset = subset
        self.considered = considered
        self.depth = depth
        self.distribution: ClassDistribution | None = None
        self.leaf_class: int | None = None
        self.test: SplitTest | None = None
        self.children: list[DecisionNode] = []
        self.gain_slots: dict[int, GainResult] = {}
        self.att_tasks = 0

    @property
    def n_cases(self) -> int:
        return len(self.subset)

    @property
    def is_leaf(self) -> bool:
        return self.leaf_class is not None

    @property
    def is_processed(self) -> bool:
        return self.leaf_class is not None or self.test is not None

    def set_as_leaf(self) -> None:
        self.leaf_class = self.distribution.majority()
        self.gain_slots = {}

    def iter_nodes(self) -> Iterator["DecisionNode"]:
        stack = [self]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(reversed(n.children))


@dataclass(eq=False)
class DecisionTree:
    root: DecisionNode
    ts: TrainingSet
    node_count: int = 0
    leaf_count: int = 0
    depth: int = 0

    def __post_init__(self):
        for n in self.root.iter_nodes():
            self.node_count += 1
            self.leaf_count += n.is_leaf
            self.depth = max(self.depth, n.depth)

    def to_text(self) -> str:
        return format_tree(self.root, self.ts)

    def predict(self, case: int) -> int:
        """Class index for a training case; unknown values follow the heaviest branch."""
        n = self.root
        while not n.is_leaf:
            t = n.test
            v = self.ts.columns[t.attribute][case]
            if v == UNKNOWN:
                n = max(n.children, key=lambda ch: ch.subset.total_weight)
            elif t.kind == CONTINUOUS_THRESHOLD:
                n = n.children[int(v > t.threshold_rank)]
            else:
                n = n.children[v]
        return n.leaf_class


def compute_frequencies(subset: CaseSubset, ts: TrainingSet) -> ClassDistribution:
    freq = _kernels.class_freq(subset.case_ids, subset.weights, ts.class_column, ts.n_classes)
    return ClassDistribution(freq, subset.total_weight)


def info(dist: ClassDistribution) -> float:
    """Entropy in bits."""
    if dist.total <= 0:
        raise ValueError("entropy of an empty distribution")
    return _kernels.info(dist.freq, dist.total)


def gain_discrete(subset: CaseSubset, attr: int, ts: TrainingSet) -> GainResult:
    g = _kernels.discrete_gain(
        subset.case_ids, subset.weights, ts.columns[attr], ts.class_column,
        len(ts.attributes[attr].domain), ts.n_classes,
    )
    return GainResult(g)


def gain_continuous(subset: CaseSubset, attr: int, ts: TrainingSet, *,
                    boundary: bool = True, counting_sort: bool = False) -> GainResult:
    keys, cls, w = _kernels.gather_keys(subset.case_ids, subset.weights, ts.columns[attr], ts.class_column)
    if counting_sort:
        keys = _kernels.counting_sort_keys(keys)
    else:
        keys.sort()
    g, t = _kernels.best_threshold(keys, cls, w, ts.n_classes, ts.sorted_values[attr], boundary)
    if math.isnan(t):
        return GainResult(0.0)
    return GainResult(g, t)


def _threshold_rank(table: np.ndarray, local_threshold: float) -> int:
    # greatest entry strictly below the local threshold, else the smallest entry
    return max(int(np.searchsorted(table, local_threshold, side="left")) - 1, 0)


def find_threshold(local_threshold: float, attr: int, ts: TrainingSet) -> float:
    table = ts.sorted_values[attr]
    return float(table[_threshold_rank(table, local_threshold)])


def split_pre(node: DecisionNode, ts: TrainingSet, min_cases: float = 2.0) -> bool:
    if node.is_processed:
        raise SplitError("node already processed")
    node.distribution = dist = compute_frequencies(node.subset, ts)
    one_class = np.count_nonzero(dist.freq) <= 1
    if one_class or dist.total < min_cases:
        node.set_as_leaf()
        return True
    return False


def split_att(node: DecisionNode, attr: int, ts: TrainingSet, params: GrowParams = GrowParams()) -> None:
    if attr not in node.considered:
        raise SplitError(f"attribute {attr} is not considered at this node")
    if attr in node.gain_slots:
        raise SplitError(f"gain slot {attr} written twice")
    if ts.is_continuous(attr):
        result = gain_continuous(node.subset, attr, ts, boundary=params.boundary,
                                 counting_sort=params.counting_sort)
    else:
        result = gain_discrete(node.subset, attr, ts)
    node.gain_slots[attr] = result


def best_attribute(gains: dict[int, GainResult], considered) -> int | None:
    """Lowest attribute index among the near-maximal gains."""
    if not considered:
        return None
    top = max(gains[a].gain for a in considered)
    return min(a for a in considered if gains[a].gain >= top - TIE_EPS)


def partition(subset: CaseSubset, test: SplitTest, ts: TrainingSet) -> list[CaseSubset]:
    """Child subsets in outcome order.

    Unknown-valued cases go to every child whose known weight is positive,
    scaled by that child's share of the known weight.
    """
    values = ts.columns[test.attribute][subset.case_ids]
    unknown = values == UNKNOWN
    if test.kind == CONTINUOUS_THRESHOLD:
        outcome = (values > test.threshold_rank).astype(np.int32)
    else:
        outcome = values
    w = subset.weights
    w_known = w[~unknown].sum()
    has_unknown = bool(unknown.any())
    children = []
    for o in range(test.n_outcomes(ts)):
        routed = (outcome == o) & ~unknown
        w_o = w[routed].sum()
        if has_unknown and w_o > 0:
            keep = routed | unknown
            cw = np.where(unknown, w * (w_o / w_known), w)[keep]
        else:
            keep = routed
            cw = w[keep]
        children.append(CaseSubset.of(subset.case_ids[keep], cw))
    return children


def select_cases(node: DecisionNode, test: SplitTest, outcome: int, ts: TrainingSet) -> CaseSubset:
    return partition(node.subset, test, ts)[outcome]


def split_post(node: DecisionNode, ts: TrainingSet, min_cases: float = 2.0) -> None:
    missing = [a for a in node.considered if a not in node.gain_slots]
    if missing:
        raise SplitError(f"gain slots {missing} not computed")
    best = best_attribute(node.gain_slots, node.considered)
    if best is None or node.gain_slots[best].gain <= TIE_EPS:
        node.set_as_leaf()
        return
    if ts.is_continuous(best):
        table = ts.sorted_values[best]
        rank = _threshold_rank(table, node.gain_slots[best].local_threshold)
        test = SplitTest(best, CONTINUOUS_THRESHOLD, float(table[rank]), rank)
        considered = node.considered
    else:
        test = SplitTest(best, DISCRETE_ALL_VALUES)
        considered = tuple(a for a in node.considered if a != best)
    node.test = test
    node.children = [DecisionNode(s, considered, node.depth + 1) for s in partition(node.subset, test, ts)]
    node.gain_slots = {}


def split(node: DecisionNode, ts: TrainingSet, params: GrowParams = GrowParams()) -> None:
    """All three phases in sequence."""
    if split_pre(node, ts, params.min_cases):
        return
    for a in node.considered:
        split_att(node, a, ts, params)
    split_post(node, ts, params.min_cases)


def new_root(ts: TrainingSet) -> DecisionNode:
    return DecisionNode(root_subset(ts), tuple(range(ts.n_attributes)))


def build_sequential(ts: TrainingSet, params: GrowParams = GrowParams()) -> DecisionTree:
    """Breadth-first growth from a FIFO of unprocessed nodes."""
    root = new_root(ts)
    q = deque([root])
    while q:
        n = q.popleft()
        split(n, ts, params)
        q.extend(n.children)
    return DecisionTree(root, ts)


def format_tree(root: DecisionNode, ts: TrainingSet) -> str:
    """One line per branch, indented by depth, leaves as ``-> class (weight)``."""
    lines = []

    def leaf(n):
        return f"-> {ts.class_domain[n.leaf_class]} ({n.subset.total_weight:.3f})"

    def walk(n, indent):
        a = ts.attributes[n.test.attribute]
        for o, child in enumerate(n.children):
            if n.test.kind == CONTINUOUS_THRESHOLD:
                cond = f"{a.name} {'<=' if o == 0 else '>'} {n.test.threshold!r}"
            else:
                cond = f"{a.name} = {a.domain[o]}"
            pad = "  " * indent
            if child.is_leaf:
                lines.append(f"{pad}{cond} {leaf(child)}")
            else:
                lines.append(f"{pad}{cond}")
                walk(child, indent + 1)

    if root.is_leaf:
        lines.append(leaf(root))
    else:
        walk(root, 0)
    return "\n".join(lines) + "\n"

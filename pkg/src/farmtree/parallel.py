"""Tree growth as a stream of node and attribute tasks over the farm.

NP: every node is one ``BUILD_NODE`` task running the whole split in a
worker. NAP: a node may instead be fanned out as one ``BUILD_ATT`` task per
considered attribute; the emitter runs ``split_pre`` before the fan-out and
``split_post`` once the last attribute task is back. A cost model decides,
child by child, which of the two shapes to use. Both strategies grow the
same tree as :func:`farmtree.tree.build_sequential`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from . import runtime
from .dataset import TrainingSet
from .runtime import EOS, GO_ON, Emitter, FarmConfig, Task, farm_run, set_weight
from .tree import (
    DecisionNode, DecisionTree, GrowParams, build_sequential, new_root, split, split_att, split_post, split_pre,
)

BUILD_NODE = "BUILD_NODE"
BUILD_ATT = "BUILD_ATT"

NP = "np"
NAP = "nap"
SEQ = "seq"
STRATEGIES = (SEQ, NP, NAP)

ALPHA = "alpha"
NLOGN = "nlogn"
NSQ = "nsq"
COST_MODELS = (ALPHA, NLOGN, NSQ)


@dataclass(frozen=True)
class CostModel:
    kind: str = NSQ
    alpha: float = 1000.0

    def __post_init__(self):
        if self.kind not in COST_MODELS:
            raise ValueError(f"unknown cost model {self.kind!r}")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")


def build_att_test(model: CostModel, total_cases: int, c: int, r: int) -> bool:
    """True when a node with ``r`` cases and ``c`` attributes should be split by attribute."""
    if r <= 1:
        return False
    if model.kind == ALPHA:
        return model.alpha < r
    if model.kind == NLOGN:
        return total_cases < c * r * math.log2(r)
    return total_cases < c * r * r


class BuildTask(Task):
    __slots__ = ("node", "kind", "att")

    def __init__(self, node: DecisionNode, kind: str, att: int | None = None):
        super().__init__(node.n_cases)
        self.node = node
        self.kind = kind
        self.att = att

    @property
    def is_build_att(self) -> bool:
        return self.kind == BUILD_ATT

    def __repr__(self):
        extra = f", att={self.att}" if self.is_build_att else ""
        return f"BuildTask({self.kind}{extra}, r={self.node.n_cases})"


@dataclass
class EmitterState:
    root: DecisionNode
    ts: TrainingSet
    params: GrowParams
    cost_model: CostModel = field(default_factory=CostModel)
    in_flight: int = 0
    # (event, node id, payload) records, filled only when tracing
    trace: list | None = None


class NPEmitter(Emitter):
    def __init__(self, state: EmitterState):
        self.state = state

    def _emit(self, node: DecisionNode) -> BuildTask:
        task = BuildTask(node, BUILD_NODE)
        set_weight(task, node.n_cases)
        self.state.in_flight += 1
        if self.state.trace is not None:
            self.state.trace.append((BUILD_NODE, id(node), task.weight))
        return task

    def svc(self, task):
        st = self.state
        if task is None:
            return self._emit(st.root)
        st.in_flight -= 1
        n = task.node
        if st.in_flight == 0 and not n.children:
            return EOS
        for child in n.children:
            self.send_out(self._emit(child))
        return GO_ON


def np_worker(task: BuildTask, ts: TrainingSet, params: GrowParams) -> BuildTask:
    split(task.node, ts, params)
    return task


class NAPEmitter(Emitter):
    def __init__(self, state: EmitterState):
        self.state = state

    def _log(self, event, node, payload=None):
        if self.state.trace is not None:
            self.state.trace.append((event, id(node), payload))

    def _fan_out(self, node: DecisionNode) -> None:
        """Attribute tasks for a node whose ``split_pre`` said it is not a leaf."""
        st = self.state
        c = len(node.considered)
        if c == 0:
            split_post(node, st.ts, st.params.min_cases)
            self._log("post", node)
            return
        node.att_tasks = c
        st.in_flight += 1
        for a in node.considered:
            task = BuildTask(node, BUILD_ATT, a)
            set_weight(task, node.n_cases)
            self._log(BUILD_ATT, node, (a, task.weight))
            self.send_out(task)

    def svc(self, task):
        st = self.state
        if task is None:
            if split_pre(st.root, st.ts, st.params.min_cases):
                self._log("pre-leaf", st.root)
                return EOS
            self._fan_out(st.root)
            return GO_ON if st.in_flight else EOS

        n = task.node
        if task.is_build_att:
            self._log("att-done", n, task.att)
            n.att_tasks -= 1
            if n.att_tasks < 0:
                raise RuntimeError("attribute task counter underflow")
            if n.att_tasks > 0:
                return GO_ON
            split_post(n, st.ts, st.params.min_cases)
            self._log("post", n)
        st.in_flight -= 1

        total = st.ts.case_count
        for child in n.children:
            r = child.n_cases
            c = len(child.considered)
            if not build_att_test(st.cost_model, total, c, r):
                ctask = BuildTask(child, BUILD_NODE)
                set_weight(ctask, r)
                st.in_flight += 1
                self._log(BUILD_NODE, child, ctask.weight)
                self.send_out(ctask)
            else:
                if split_pre(child, st.ts, st.params.min_cases):
                    self._log("pre-leaf", child)
                    continue
                self._fan_out(child)
        # children resolved inside the emitter add nothing in flight
        return EOS if st.in_flight == 0 else GO_ON


def nap_worker(task: BuildTask, ts: TrainingSet, params: GrowParams) -> BuildTask:
    if task.is_build_att:
        split_att(task.node, task.att, ts, params)
    else:
        split(task.node, ts, params)
    return task


def build_parallel(ts: TrainingSet, strategy: str = NAP, config: FarmConfig = FarmConfig(),
                   params: GrowParams = GrowParams(), cost_model: CostModel = CostModel(),
                   trace: list | None = None) -> DecisionTree:
    state = EmitterState(new_root(ts), ts, params, cost_model, trace=trace)
    if strategy == NP:
        emitter, work = NPEmitter(state), np_worker
    elif strategy == NAP:
        emitter, work = NAPEmitter(state), nap_worker
    else:
        raise ValueError(f"unknown parallel strategy {strategy!r}")
    farm_run(config, emitter, lambda task: work(task, ts, params))
    return DecisionTree(state.root, ts)


def build(ts: TrainingSet, strategy: str = SEQ, *, workers: int = 1, scheduler: str = runtime.WS,
          qsize: int = runtime.DEFAULT_QSIZE, params: GrowParams = GrowParams(),
          cost_model: CostModel = CostModel()) -> DecisionTree:
    """Single entry point over the sequential and both parallel strategies."""
    if strategy == SEQ:
        return build_sequential(ts, params)
    return build_parallel(ts, strategy, FarmConfig(workers, qsize, scheduler), params, cost_model)

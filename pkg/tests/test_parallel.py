import math
from collections import defaultdict

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_dataset
from farmtree.dataset import load_data, load_schema
from farmtree.parallel import (
    ALPHA, BUILD_ATT, BUILD_NODE, NAP, NLOGN, NP, NSQ, BuildTask, CostModel, EmitterState, NAPEmitter,
    NPEmitter, build, build_att_test, build_parallel, nap_worker,
)
from farmtree.runtime import EOS, GO_ON, FarmConfig, FarmError
from farmtree.synth import SyntheticSpec, generate
from farmtree.tree import GrowParams, build_sequential, new_root, split, split_pre


class TestBuildAttTest:
    def test_nsq_large_dataset(self):
        assert build_att_test(CostModel(NSQ), 10_000_000, 9, 10_000_000)

    def test_alpha_below_threshold(self):
        assert not build_att_test(CostModel(ALPHA, 1000), 10_000, 3, 500)

    def test_nlogn(self):
        assert 10 * 100 * math.log2(100) > 1000
        assert build_att_test(CostModel(NLOGN), 1000, 10, 100)

    @pytest.mark.parametrize("kind", [ALPHA, NLOGN, NSQ])
    @pytest.mark.parametrize("r", [0, 1])
    def test_tiny_nodes_never_fan_out(self, kind, r):
        assert not build_att_test(CostModel(kind, alpha=1e-9), 1, 100, r)

    def test_alpha_is_strict(self):
        assert not build_att_test(CostModel(ALPHA, 1000), 10**6, 5, 1000)
        assert build_att_test(CostModel(ALPHA, 1000), 10**6, 5, 1001)

    def test_nsq_boundary(self):
        assert not build_att_test(CostModel(NSQ), 900, 9, 10)
        assert build_att_test(CostModel(NSQ), 899, 9, 10)

    def test_invalid_models(self):
        with pytest.raises(ValueError):
            CostModel("cubic")
        with pytest.raises(ValueError):
            CostModel(ALPHA, alpha=0)

    @settings(max_examples=300, deadline=None)
    @given(st.sampled_from([ALPHA, NLOGN, NSQ]), st.integers(1, 10**7),
           st.integers(1, 12), st.integers(0, 12), st.integers(0, 10**6), st.integers(0, 10**6))
    def test_monotone_in_r_and_c(self, kind, total, c_hi, c_drop, r_a, r_b):
        model = CostModel(kind)
        c_lo = max(1, c_hi - c_drop)
        r_lo, r_hi = sorted((r_a, r_b))
        if not build_att_test(model, total, c_hi, r_hi):
            assert not build_att_test(model, total, c_lo, r_lo)


def three_way_set():
    schema = load_schema("d: discrete u,v,w\nclass: a,b")
    rows = ["u,a"] * 50 + ["v,b"] * 30 + ["w,a"] * 20
    return load_data(schema, "\n".join(rows) + "\n")


def capture(emitter):
    sent = []
    emitter.send_out = sent.append
    return sent


class TestNPEmitter:
    def test_first_call_emits_root(self):
        ts = three_way_set()
        e = NPEmitter(EmitterState(new_root(ts), ts, GrowParams()))
        task = e.svc(None)
        assert task.kind == BUILD_NODE and task.weight == 100
        assert e.state.in_flight == 1

    def test_children_weighted_by_size(self):
        ts = three_way_set()
        e = NPEmitter(EmitterState(new_root(ts), ts, GrowParams()))
        sent = capture(e)
        task = e.svc(None)
        split(task.node, ts)
        assert e.svc(task) is GO_ON
        assert [t.weight for t in sent] == [50, 30, 20]
        assert all(t.kind == BUILD_NODE for t in sent)
        assert e.state.in_flight == 3

    def test_last_leaf_ends_stream(self):
        ts = three_way_set()
        e = NPEmitter(EmitterState(new_root(ts), ts, GrowParams()))
        sent = capture(e)
        task = e.svc(None)
        split(task.node, ts)
        e.svc(task)
        results = []
        for child_task in sent:
            split(child_task.node, ts)
            assert child_task.node.is_leaf
            results.append(e.svc(child_task))
        assert results == [GO_ON, GO_ON, EOS]
        assert e.state.in_flight == 0


def five_attribute_set():
    schema = load_schema("a0: continuous\na1: continuous\na2: discrete p,q\na3: continuous\n"
                         "a4: discrete p,q,r\nclass: y,n")
    rows = [f"{i},{i % 7},{'pq'[i % 2]},{(i * 3) % 11},{'pqr'[i % 3]},{'yn'[i < 12]}" for i in range(30)]
    return load_data(schema, "\n".join(rows) + "\n")


class TestNAPEmitter:
    def test_root_fans_out_per_attribute(self):
        ts = five_attribute_set()
        e = NAPEmitter(EmitterState(new_root(ts), ts, GrowParams()))
        sent = capture(e)
        assert e.svc(None) is GO_ON
        assert [t.att for t in sent] == [0, 1, 2, 3, 4]
        assert all(t.kind == BUILD_ATT and t.weight == 30 for t in sent)
        assert e.state.root.att_tasks == 5

    def test_last_attribute_triggers_split_post(self):
        ts = five_attribute_set()
        e = NAPEmitter(EmitterState(new_root(ts), ts, GrowParams(), CostModel(ALPHA, alpha=10**9)))
        sent = capture(e)
        e.svc(None)
        root_tasks = list(sent)
        sent.clear()
        for t in root_tasks[:4]:
            nap_worker(t, ts, GrowParams())
            assert e.svc(t) is GO_ON
            assert e.state.root.test is None
        nap_worker(root_tasks[4], ts, GrowParams())
        e.svc(root_tasks[4])
        root = e.state.root
        assert root.test is not None and root.att_tasks == 0
        # children fail the cost test, so each becomes one node task
        assert [t.kind for t in sent] == [BUILD_NODE] * len(root.children)
        assert [t.weight for t in sent] == [c.n_cases for c in root.children]

    def test_root_leaf_ends_immediately(self):
        schema = load_schema("x: continuous\nclass: a,b")
        ts = load_data(schema, "1,a\n2,a\n3,a\n")
        e = NAPEmitter(EmitterState(new_root(ts), ts, GrowParams()))
        sent = capture(e)
        assert e.svc(None) is EOS
        assert sent == [] and e.state.root.is_leaf

    def test_underflow_is_a_fault(self):
        ts = five_attribute_set()
        e = NAPEmitter(EmitterState(new_root(ts), ts, GrowParams()))
        sent = capture(e)
        e.svc(None)
        extra = BuildTask(e.state.root, BUILD_ATT, 0)
        e.state.root.att_tasks = 0
        with pytest.raises(RuntimeError, match="underflow"):
            e.svc(extra)
        assert len(sent) == 5

    def test_worker_writes_only_its_slot(self):
        ts = five_attribute_set()
        node = new_root(ts)
        assert not split_pre(node, ts)
        nap_worker(BuildTask(node, BUILD_ATT, 2), ts, GrowParams())
        assert list(node.gain_slots) == [2]

    def test_worker_node_task_is_full_split(self):
        ts = five_attribute_set()
        a, b = new_root(ts), new_root(ts)
        nap_worker(BuildTask(a, BUILD_NODE), ts, GrowParams())
        split(b, ts)
        assert a.test == b.test and len(a.children) == len(b.children)


STRATEGY_GRID = [
    (NP, 1, "ws", NSQ), (NP, 3, "drr", NSQ), (NP, 4, "od", NSQ),
    (NAP, 1, "ws", NSQ), (NAP, 2, "drr", ALPHA), (NAP, 4, "od", NLOGN), (NAP, 7, "ws", NSQ),
]


@pytest.mark.parametrize("seed", range(200, 212))
@pytest.mark.parametrize("strategy, workers, scheduler, model", STRATEGY_GRID)
def test_strategy_transparency(seed, strategy, workers, scheduler, model):
    ts, _ = random_dataset(seed)
    expected = build_sequential(ts).to_text()
    tree = build(ts, strategy, workers=workers, scheduler=scheduler, cost_model=CostModel(model, alpha=20))
    assert tree.to_text() == expected


@pytest.mark.parametrize("qsize", [1, 2])
def test_tiny_queues_still_grow_the_same_tree(qsize):
    ts, _ = random_dataset(7, max_cases=200)
    tree = build(ts, NAP, workers=3, qsize=qsize, cost_model=CostModel(ALPHA, alpha=1))
    assert tree.to_text() == build_sequential(ts).to_text()


def test_nap_seven_workers_on_100k_cases():
    ts = generate(SyntheticSpec(100_000, seed=3))
    assert build(ts, NAP, workers=7).to_text() == build_sequential(ts).to_text()


def test_counting_sort_flag_is_transparent():
    ts = generate(SyntheticSpec(5000, seed=4, unknown_rate=0.05))
    params = GrowParams(counting_sort=True)
    assert build(ts, NAP, workers=3, params=params).to_text() == build_sequential(ts).to_text()


def test_unknown_strategy():
    ts = three_way_set()
    with pytest.raises(ValueError):
        build_parallel(ts, "pipeline")


def test_worker_failure_surfaces(monkeypatch):
    import farmtree.parallel as par

    def broken(task, ts, params):
        raise MemoryError("worker died")

    monkeypatch.setattr(par, "nap_worker", broken)
    with pytest.raises(FarmError):
        build_parallel(five_attribute_set(), NAP, FarmConfig(2))


def traced_build(seed, model):
    ts, _ = random_dataset(seed)
    trace = []
    tree = build_parallel(ts, NAP, FarmConfig(3), GrowParams(), model, trace=trace)
    nodes = {id(n): n for n in tree.root.iter_nodes()}
    return tree, trace, nodes


TRACE_CASES = [(s, m) for s in range(300, 310) for m in (CostModel(ALPHA, 5), CostModel(NLOGN), CostModel(NSQ))]


@pytest.mark.parametrize("seed, model", TRACE_CASES)
def test_trace_invariants(seed, model):
    tree, trace, nodes = traced_build(seed, model)
    att_sent, att_back = defaultdict(list), defaultdict(list)
    first_seen, post_at, pre_leaf = {}, {}, set()
    for i, (event, nid, payload) in enumerate(trace):
        node = nodes[nid]
        first_seen.setdefault(nid, i)
        if event == BUILD_NODE:
            assert payload == node.n_cases
        elif event == BUILD_ATT:
            att, weight = payload
            assert weight == node.n_cases
            assert att in node.considered
            assert nid not in pre_leaf
            att_sent[nid].append(att)
        elif event == "att-done":
            att_back[nid].append(payload)
        elif event == "post":
            post_at[nid] = i
        elif event == "pre-leaf":
            pre_leaf.add(nid)
            assert node.is_leaf

    for nid, atts in att_sent.items():
        assert sorted(att_back[nid]) == sorted(atts) == sorted(nodes[nid].considered)
        assert nid in post_at
    # split_post runs before anything is emitted for the node's children
    for nid, i in post_at.items():
        for child in nodes[nid].children:
            if id(child) in first_seen:
                assert first_seen[id(child)] > i
    assert tree.to_text() == build_sequential(tree.ts).to_text()


@pytest.mark.parametrize("seed, model", TRACE_CASES)
def test_cost_model_cascade(seed, model):
    tree, _, _ = traced_build(seed, model)
    total = tree.ts.case_count

    def fans_out(n):
        return build_att_test(model, total, len(n.considered), n.n_cases)

    for node in tree.root.iter_nodes():
        if node is not tree.root and not fans_out(node):
            for d in node.iter_nodes():
                assert not fans_out(d)


def test_every_node_takes_one_path():
    tree, trace, nodes = traced_build(301, CostModel(ALPHA, 5))
    paths = defaultdict(set)
    for event, nid, _ in trace:
        if event in (BUILD_NODE, BUILD_ATT, "pre-leaf"):
            paths[nid].add("att" if event != BUILD_NODE else "node")
    assert set(paths) <= set(nodes)
    assert all(len(p) == 1 for p in paths.values())

"""
Node tasks versus node-and-attribute tasks
==========================================

Both strategies grow the same tree as the sequential builder. NP hands one
whole node to a worker; NAP splits big nodes into one task per attribute
and runs the cheap bookkeeping in the emitter. The trace shows which
shape each node took.
"""

import time
from collections import Counter

from farmtree import FarmConfig, SyntheticSpec, build_sequential, generate
from farmtree.parallel import NAP, NP, CostModel, build_parallel

ts = generate(SyntheticSpec(200_000, seed=7, noise=0.01))

t0 = time.perf_counter()
reference = build_sequential(ts).to_text()
print(f"seq  {time.perf_counter() - t0:.2f}s")

for strategy in (NP, NAP):
    trace = []
    t0 = time.perf_counter()
    tree = build_parallel(ts, strategy, FarmConfig(3), cost_model=CostModel("nsq"), trace=trace)
    elapsed = time.perf_counter() - t0
    kinds = Counter(event for event, _, _ in trace)
    same = tree.to_text() == reference
    print(f"{strategy:<4} {elapsed:.2f}s  same tree: {same}  events: {dict(kinds)}")

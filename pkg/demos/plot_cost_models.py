"""
Where each cost model switches to attribute tasks
=================================================

For a node with ``r`` cases and ``c`` candidate attributes in a training
set of ``T`` cases, each model answers "fan out by attribute?". Once a
node says no, all its descendants say no as well, since ``r`` and ``c``
only shrink going down.
"""

import numpy as np

from farmtree.parallel import CostModel, build_att_test

T, c = 1_000_000, 9
sizes = np.unique(np.logspace(0, 6, 25).astype(int))

for kind in ("alpha", "nlogn", "nsq"):
    model = CostModel(kind, alpha=1000)
    first = next((r for r in sizes if build_att_test(model, T, c, int(r))), None)
    print(f"{kind:>5}: attribute tasks from r = {first}")

# the same sweep over a tree: count nodes taking each path
from farmtree import SyntheticSpec, generate
from farmtree.parallel import BUILD_ATT, BUILD_NODE, NAP, build_parallel
from farmtree.runtime import FarmConfig

ts = generate(SyntheticSpec(50_000, seed=3, noise=0.02))
for kind in ("alpha", "nlogn", "nsq"):
    trace = []
    build_parallel(ts, NAP, FarmConfig(2), cost_model=CostModel(kind), trace=trace)
    fanned = {nid for e, nid, _ in trace if e == BUILD_ATT}
    whole = {nid for e, nid, _ in trace if e == BUILD_NODE}
    print(f"{kind:>5}: {len(fanned)} nodes by attribute, {len(whole)} whole nodes")

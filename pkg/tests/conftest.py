import numpy as np
import pytest

from farmtree.dataset import CONTINUOUS, DISCRETE, UNKNOWN, AttributeSchema, Schema, TrainingSet
from reference import RefData


def random_dataset(seed, max_cases=200, max_attrs=6, unknown_rate=None):
    """Small random dataset as (TrainingSet, RefData).

    Continuous values are drawn at a random resolution so that some sets
    have many tied values and others almost none. Labels depend weakly on
    the first attributes so trees have some depth.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(10, max_cases + 1))
    m = int(rng.integers(1, max_attrs + 1))
    nc = int(rng.integers(2, 5))
    if unknown_rate is None:
        unknown_rate = (0.0, 0.1)[seed % 2]
    kinds, domains, raw, attrs = [], [], [], []
    score = np.zeros(n)
    for a in range(m):
        if rng.random() < 0.6:
            levels = int(rng.choice([3, 10, 50, 10_000]))
            x = rng.integers(0, levels, n) / levels * 10
            kinds.append("c")
            domains.append(0)
            attrs.append(AttributeSchema(f"x{a}", CONTINUOUS))
            score += rng.normal() * x
        else:
            h = int(rng.integers(2, 5))
            x = rng.integers(0, h, n).astype(float)
            kinds.append("d")
            domains.append(h)
            attrs.append(AttributeSchema(f"x{a}", DISCRETE, tuple(f"v{k}" for k in range(h))))
            score += rng.normal(size=h)[x.astype(int)] * 5
        raw.append(x)
    score += rng.normal(scale=score.std() + 1e-9, size=n)
    edges = np.quantile(score, np.linspace(0, 1, nc + 1)[1:-1])
    classes = np.searchsorted(edges, score).astype(np.int32)

    for a in range(m):
        blank = rng.random(n) < unknown_rate
        raw[a] = raw[a].copy()
        raw[a][blank] = np.nan if kinds[a] == "c" else UNKNOWN

    schema = Schema(tuple(attrs), tuple(f"k{c}" for c in range(nc)))
    cols = [r if k == "c" else r.astype(np.int32) for r, k in zip(raw, kinds)]
    ts = TrainingSet.from_raw(schema, cols, classes)
    return ts, RefData(kinds, domains, raw, classes, nc)


@pytest.fixture
def toy_schema():
    return Schema(
        (AttributeSchema("outlook", DISCRETE, ("sunny", "overcast", "rain")),
         AttributeSchema("temp", CONTINUOUS)),
        ("yes", "no"),
    )


ACCEPTANCE_LINES: list[str] = []


def report(criterion, status, detail):
    """Record one acceptance line; printed again in the terminal summary."""
    line = f"criterion {criterion}: {status} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return status == "PASS"


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)

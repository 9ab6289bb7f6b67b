"""Timing sweeps over strategies, worker counts, schedulers and cost models.

Each configuration is timed ``reps`` times (tree growth only); the highest
and lowest samples are dropped and the rest averaged. Every configuration
must grow exactly the sequential tree, otherwise the sweep fails.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Callable

from . import runtime
from .dataset import TrainingSet
from .parallel import COST_MODELS, NAP, NP, SEQ, CostModel, build
from .tree import GrowParams

CSV_COLUMNS = ("strategy", "workers", "scheduler", "cost_model", "mean_seconds", "speedup")


class TreeMismatchError(RuntimeError):
    pass


@dataclass(frozen=True)
class BenchPlan:
    strategies: tuple[str, ...] = (SEQ, NP, NAP)
    workers: tuple[int, ...] = (1, 2, 3)
    schedulers: tuple[str, ...] = (runtime.WS,)
    cost_models: tuple[str, ...] = ("nsq",)
    reps: int = 5
    qsize: int = runtime.DEFAULT_QSIZE
    alpha: float = 1000.0
    params: GrowParams = field(default_factory=GrowParams)

    def __post_init__(self):
        if self.reps < 3:
            raise ValueError("trimmed means need at least 3 repetitions")
        for cm in self.cost_models:
            if cm not in COST_MODELS:
                raise ValueError(f"unknown cost model {cm!r}")

    def configurations(self) -> list["Config"]:
        """Sequential baseline first; cost models only vary NAP runs."""
        out = [Config(SEQ, 1, "-", "-")]
        for s in self.strategies:
            if s == SEQ:
                continue
            models = self.cost_models if s == NAP else ("-",)
            for w in self.workers:
                for sch in self.schedulers:
                    for cm in models:
                        out.append(Config(s, w, sch, cm))
        return out


@dataclass(frozen=True)
class Config:
    strategy: str
    workers: int
    scheduler: str
    cost_model: str

    def run(self, ts: TrainingSet, plan: BenchPlan):
        if self.strategy == SEQ:
            return build(ts, SEQ, params=plan.params)
        cm = CostModel(self.cost_model if self.cost_model != "-" else "nsq", plan.alpha)
        return build(ts, self.strategy, workers=self.workers, scheduler=self.scheduler,
                     qsize=plan.qsize, params=plan.params, cost_model=cm)


@dataclass
class BenchRow:
    config: Config
    samples: list[float]
    mean_seconds: float
    speedup: float = float("nan")

    def as_dict(self) -> dict:
        c = self.config
        return {"strategy": c.strategy, "workers": c.workers, "scheduler": c.scheduler,
                "cost_model": c.cost_model, "mean_seconds": f"{self.mean_seconds:.6f}",
                "speedup": f"{self.speedup:.4f}"}


def trimmed_mean(samples) -> float:
    if len(samples) < 3:
        raise ValueError("need at least 3 samples")
    kept = sorted(samples)[1:-1]
    return sum(kept) / len(kept)


def time_config(config: Config, ts: TrainingSet, plan: BenchPlan, reference: str | None = None):
    samples = []
    for _ in range(plan.reps):
        t0 = time.perf_counter()
        tree = config.run(ts, plan)
        samples.append(time.perf_counter() - t0)
        text = tree.to_text()
        if reference is not None and text != reference:
            raise TreeMismatchError(f"{config} grew a different tree than the sequential build")
        reference = text
    return samples, reference


def run_bench(ts: TrainingSet, plan: BenchPlan,
              progress: Callable[[BenchRow], None] | None = None) -> list[BenchRow]:
    rows = []
    reference = None
    for config in plan.configurations():
        samples, reference = time_config(config, ts, plan, reference)
        row = BenchRow(config, samples, trimmed_mean(samples))
        rows.append(row)
        if progress:
            progress(row)
    base = rows[0].mean_seconds
    for row in rows:
        row.speedup = base / row.mean_seconds
    return rows


def report_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow(row.as_dict())
    return buf.getvalue()


def report_gnuplot(rows: list[BenchRow]) -> str:
    """Speedup against worker count, one indexed block per series."""
    series: dict[str, list[BenchRow]] = {}
    for row in rows[1:]:
        c = row.config
        series.setdefault(f"{c.strategy}-{c.scheduler}-{c.cost_model}", []).append(row)
    blocks = []
    for name, rs in series.items():
        lines = [f"# {name}", "# workers mean_seconds speedup"]
        lines += [f"{r.config.workers} {r.mean_seconds:.6f} {r.speedup:.4f}" for r in rs]
        blocks.append("\n".join(lines))
    return "\n\n\n".join(blocks) + "\n"

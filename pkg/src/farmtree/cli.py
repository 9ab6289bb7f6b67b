"""Command line: ``farmtree train | gen | bench``."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import runtime
from .bench import BenchPlan, TreeMismatchError, report_csv, report_gnuplot, run_bench
from .dataset import DataError, SchemaError, load_data, load_schema
from .parallel import COST_MODELS, STRATEGIES, CostModel, build
from .synth import SyntheticSpec, generate, write_dataset
from .tree import GrowParams


def _csv_list(kind):
    def parse(text):
        return tuple(kind(v) for v in text.split(",") if v)
    return parse


def _add_grow_flags(p, list_flags=False):
    many = _csv_list(str)
    p.add_argument("--scheduler", "--schedulers", dest="scheduler", default=runtime.WS,
                   type=many if list_flags else str)
    p.add_argument("--qsize", type=int, default=runtime.DEFAULT_QSIZE)
    p.add_argument("--cost-model", "--cost-models", dest="cost_model", default="nsq",
                   type=many if list_flags else str)
    p.add_argument("--alpha", type=float, default=1000.0)
    p.add_argument("--min-cases", type=float, default=2.0)
    p.add_argument("--counting-sort", action="store_true",
                   help="use counting sort for continuous attributes")


def _add_gen_flags(p, prefix=""):
    p.add_argument(f"--{prefix}cases", type=int, default=100_000)
    p.add_argument(f"--{prefix}continuous", type=int, default=6)
    p.add_argument(f"--{prefix}discrete", type=int, default=3)
    p.add_argument(f"--{prefix}classes", type=int, default=2)
    p.add_argument(f"--{prefix}unknown-rate", type=float, default=0.0)
    p.add_argument(f"--{prefix}noise", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)


def _spec(args, prefix=""):
    g = lambda name: getattr(args, prefix + name)  # noqa: E731
    return SyntheticSpec(g("cases"), g("continuous"), g("discrete"), g("classes"),
                         g("unknown_rate"), args.seed, g("noise"))


def _params(args):
    return GrowParams(min_cases=args.min_cases, counting_sort=args.counting_sort)


def _load(args):
    schema = load_schema(Path(args.schema).read_text(encoding="utf-8"))
    return load_data(schema, Path(args.data).read_text(encoding="utf-8"))


def cmd_train(args) -> int:
    ts = _load(args)
    t0 = time.perf_counter()
    tree = build(ts, args.strategy, workers=args.workers, scheduler=args.scheduler, qsize=args.qsize,
                 params=_params(args), cost_model=CostModel(args.cost_model, args.alpha))
    seconds = time.perf_counter() - t0
    text = tree.to_text()
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(f"nodes={tree.node_count} leaves={tree.leaf_count} depth={tree.depth} seconds={seconds:.4f}")
    return 0


def cmd_gen(args) -> int:
    out = Path(args.out)
    schema_path, data_path = out.with_suffix(".schema"), out.with_suffix(".csv")
    write_dataset(_spec(args), schema_path, data_path)
    print(f"wrote {schema_path} and {data_path}")
    return 0


def cmd_bench(args) -> int:
    if args.schema or args.data:
        if not (args.schema and args.data):
            raise SchemaError("--schema and --data go together")
        ts = _load(args)
    else:
        ts = generate(_spec(args, "gen_"))
    plan = BenchPlan(args.strategies, args.workers, args.scheduler, args.cost_model,
                     args.reps, args.qsize, args.alpha, _params(args))

    def progress(row):
        c = row.config
        print(f"{c.strategy:>4} w={c.workers} {c.scheduler:>3} {c.cost_model:>5} "
              f"{row.mean_seconds:.3f}s", file=sys.stderr)

    rows = run_bench(ts, plan, progress)
    report = report_csv(rows)
    if args.out:
        Path(args.out).write_text(report, encoding="utf-8")
    else:
        sys.stdout.write(report)
    if args.gnuplot:
        Path(args.gnuplot).write_text(report_gnuplot(rows), encoding="utf-8")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="farmtree", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="grow a tree and write it as text")
    p.add_argument("--schema", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--strategy", choices=STRATEGIES, default="seq")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    _add_grow_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("gen", help="write a synthetic schema + CSV pair")
    _add_gen_flags(p)
    p.add_argument("--out", required=True, help="path prefix; .schema and .csv are appended")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="time a strategy/scheduler/cost-model sweep")
    p.add_argument("--schema")
    p.add_argument("--data")
    _add_gen_flags(p, prefix="gen-")
    p.add_argument("--strategies", type=_csv_list(str), default=STRATEGIES)
    p.add_argument("--workers", type=_csv_list(int), default=(1, 2, 3))
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--out")
    p.add_argument("--gnuplot")
    _add_grow_flags(p, list_flags=True)
    p.set_defaults(func=cmd_bench, scheduler=(runtime.WS,), cost_model=tuple(COST_MODELS))
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except TreeMismatchError as e:
        print(f"farmtree: {e}", file=sys.stderr)
        return 3
    except (OSError, SchemaError, DataError, ValueError) as e:
        print(f"farmtree: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

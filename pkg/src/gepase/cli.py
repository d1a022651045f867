"""Command line entry point: ``gepase-bench {gen,run,oracle}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import List, Optional

from . import bench
from .grid2d import load_movingai_file, scale_map


def _cmd_gen(args: argparse.Namespace) -> int:
    config = bench.ExperimentConfig.from_file(args.config)
    problems = bench.generate_problems(config)
    bench.save_problems(problems, args.out)
    print(f"wrote {len(problems)} problems to {args.out}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    config = bench.ExperimentConfig.from_file(args.config)
    if args.output:
        config.output = args.output
    problems = bench.load_problems(args.problems) if args.problems else None
    _, summary = bench.run_experiment(config, problems)
    json.dump(summary["by_rc"], sys.stdout, indent=2, sort_keys=True)
    print()
    return 0


def _cmd_oracle(args: argparse.Namespace) -> int:
    grid = scale_map(load_movingai_file(args.map), args.scale)
    cost = bench.dijkstra_oracle(
        grid, tuple(args.start), tuple(args.goal), step=args.step, footprint=args.footprint
    )
    print("unreachable" if cost is None else cost)
    return 0 if cost is not None else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gepase-bench", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="sample a problem set from a config")
    gen.add_argument("--config", required=True)
    gen.add_argument("--out", required=True, help="problem set JSON file")
    gen.set_defaults(func=_cmd_gen)

    run = sub.add_parser("run", help="run a planner sweep from a config")
    run.add_argument("--config", required=True)
    run.add_argument("--problems", help="problem set from 'gen' (sampled afresh if omitted)")
    run.add_argument("--output", help="override the config's output directory")
    run.set_defaults(func=_cmd_run)

    oracle = sub.add_parser("oracle", help="print the optimal cost of one instance")
    oracle.add_argument("--map", required=True)
    oracle.add_argument("--scale", type=int, default=1)
    oracle.add_argument("--start", type=int, nargs=2, required=True, metavar=("X", "Y"))
    oracle.add_argument("--goal", type=int, nargs=2, required=True, metavar=("X", "Y"))
    oracle.add_argument("--step", type=int, default=25)
    oracle.add_argument("--footprint", type=int, default=32)
    oracle.set_defaults(func=_cmd_oracle)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

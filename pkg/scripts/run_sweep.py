"""Run a benchmark sweep from a YAML config and print a per-rc table.

Usage: python scripts/run_sweep.py [configs/desk.yaml] [--output DIR]

Writes runs.csv, summary.json and paths/ under the output directory, same as
``gepase-bench run``.
"""

import argparse
import logging

from gepase.bench import ExperimentConfig, run_experiment


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("config", nargs="?", default="configs/desk.yaml")
    ap.add_argument("--output")
    ap.add_argument("-v", "--verbose", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)

    cfg = ExperimentConfig.from_file(args.config)
    if args.output:
        cfg.output = args.output
    _, summary = run_experiment(cfg)
    for rc, table in summary["by_rc"].items():
        n = len(summary["common_instances"][rc])
        print(f"\nrc = {rc}  ({n} instances solved by every cell)")
        print(f"{'planner':<8} {'threads':>7} {'time s':>9} {'evals':>8} {'cost':>10}")
        for planner, by_t in table.items():
            for threads, cell in sorted(by_t.items(), key=lambda kv: int(kv[0])):
                if not cell["n"]:
                    print(f"{planner:<8} {threads:>7} {'-':>9}")
                    continue
                print(f"{planner:<8} {threads:>7} {cell['mean_time_s']:>9.3f} "
                      f"{cell['mean_edge_evals']:>8.0f} {cell['mean_cost']:>10.0f}")
    print(f"\nresults in {cfg.output}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Grid comparison of the VSGD family against the baselines.

Runs every optimizer over a learning-rate grid on one problem (synthetic
logistic regression by default), averages final losses over seeds, and
prints a ranking table.  Per-run traces land in the output directory as CSV.

    python scripts/compare_optimizers.py --out results/ \
        --problem logreg:n=2000,d=50 --steps 2000 --seeds 0,1,2
"""
import argparse
import os
import sys

import numpy as np

from vsgd import HyperParams, RunConfig, run, summarize
from vsgd.traceio import write_csv

OPTIMIZERS = ("vsgd", "constant-vsgd", "adam", "amsgrad", "sgdm", "sgd")
GRID = (0.001, 0.005, 0.01, 0.02)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--problem", default="logreg:n=2000,d=50")
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--seeds", default="0,1,2")
    ap.add_argument("--out", default="results")
    ap.add_argument("--optimizers", default=",".join(OPTIMIZERS))
    args = ap.parse_args()

    seeds = [int(s) for s in args.seeds.split(",")]
    os.makedirs(args.out, exist_ok=True)

    rows = []
    for optimizer in args.optimizers.split(","):
        by_lr = {}
        for lr in GRID:
            finals = []
            for seed in seeds:
                rc = RunConfig(
                    optimizer=optimizer,
                    problem=args.problem,
                    steps=args.steps,
                    seed=seed,
                    hp=HyperParams(eta=lr),
                    record_stride=max(args.steps // 100, 1),
                )
                result = run(rc)
                write_csv(
                    result.traces,
                    os.path.join(args.out, f"{optimizer}_lr{lr:g}_seed{seed}.csv"),
                )
                finals.append(summarize(result).final_loss)
            by_lr[lr] = float(np.mean(finals))
        best_lr = min(by_lr, key=by_lr.get)
        rows.append((optimizer, best_lr, by_lr[best_lr]))

    rows.sort(key=lambda r: r[2])
    print(f"\n{args.problem}  ({args.steps} steps, seeds {seeds})")
    print(f"{'optimizer':<14} {'best lr':>8} {'mean final loss':>16}")
    for optimizer, lr, loss in rows:
        print(f"{optimizer:<14} {lr:>8g} {loss:>16.6f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Emit plot-ready loss trajectories for the VSGD family on a noisy quadratic.

    python scripts/convergence_curves.py --out curves/ --steps 20000
"""
import argparse
import os
import sys

from vsgd import HyperParams, RunConfig, run, summarize
from vsgd.traceio import write_csv


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--problem", default="quad:dim=10,noise=1.0")
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--lr", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--scheduler", default="halve:4000")
    ap.add_argument("--out", default="curves")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    for optimizer in ("vsgd", "constant-vsgd", "so-vsgd", "adam", "sgdm", "nsgd"):
        rc = RunConfig(
            optimizer=optimizer,
            problem=args.problem,
            steps=args.steps,
            seed=args.seed,
            hp=HyperParams(eta=args.lr),
            scheduler=args.scheduler,
            record_stride=max(args.steps // 500, 1),
        )
        result = run(rc)
        metrics = summarize(result)
        path = os.path.join(args.out, f"{optimizer}.csv")
        write_csv(result.traces, path)
        flag = " (diverged)" if result.diverged else ""
        print(
            f"{optimizer:<14} final {metrics.final_loss:.3e} "
            f"best {metrics.best_loss:.3e}{flag} -> {path}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())

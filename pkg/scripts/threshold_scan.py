#!/usr/bin/env python3
"""Locate a fault-tolerance threshold from finite-size crossing curves.

Sweeps either the qubit-loss rate (at zero Pauli error) or the Pauli
error rate (at zero loss) over several lattice sizes, writes the sweep
CSV, and prints the estimated crossing point.

Examples:
    python scripts/threshold_scan.py --channel loss \
        --grid 0.23,0.24,0.25,0.26,0.27 --sizes 8,10,12 --trials 2000
    python scripts/threshold_scan.py --channel error \
        --grid 0.025,0.029,0.033 --sizes 4,6,8 --trials 4000
"""

import argparse

from heraldtpc import SweepConfig, estimate_crossing, run_sweep
from heraldtpc.cli import SWEEP_HEADER, write_csv


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--channel", choices=("loss", "error"), default="loss")
    ap.add_argument("--grid", default="0.23,0.24,0.25,0.26,0.27",
                    help="comma-separated values of the swept parameter")
    ap.add_argument("--sizes", default="8,10,12")
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="threshold_scan.csv")
    return ap.parse_args()


def main():
    args = parse_args()
    grid = [float(v) for v in args.grid.split(",")]
    if args.channel == "loss":
        points = tuple((v, 0.0) for v in grid)
        channel = "loss"
    else:
        points = tuple((0.0, v) for v in grid)
        channel = "bond"
    cfg = SweepConfig(
        sizes=tuple(int(v) for v in args.sizes.split(",")),
        points=points,
        trials=args.trials,
        seed=args.seed,
        channel=channel,
        workers=args.workers,
    )
    result = run_sweep(cfg)
    rows = []
    for r in result.rows:
        p_loss = r.p_channel if channel == "loss" else 0.0
        p_bond = r.p_channel if channel == "bond" else 0.0
        rows.append((0.0, 0.0, 0.0, p_bond, p_loss, r.p_err, r.size,
                     r.trials, r.failures, r.rate, r.ci[0], r.ci[1], args.seed))
    write_csv(args.out, SWEEP_HEADER, rows)

    rates = {
        L: [rate for *_, rate in result.rates(L)] for L in cfg.sizes
    }
    est = estimate_crossing(grid, rates)
    print(f"wrote {args.out}")
    print(f"{args.channel} threshold = {est.threshold:.4f} "
          f"+/- {est.uncertainty:.4f}")
    for pair, x in sorted(est.pair_crossings.items()):
        print(f"  sizes {pair}: crossing at {x:.4f}")


if __name__ == "__main__":
    main()

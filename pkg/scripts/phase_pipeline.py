#!/usr/bin/env python3
"""Full pipeline: correctable region, then phase boundaries per strategy.

Maps the correctable (bond-loss, error) region once, then finds the
maximal tolerable gate error p_G over a grid of heralded-failure
probabilities p_h for each growth strategy, with and without memory
noise.  Writes region.csv, phase_<strategy>.csv and
phase_<strategy>_mem.csv into --outdir.

Example:
    python scripts/phase_pipeline.py --outdir results \
        --ph-grid 0.5,0.7,0.9 --trials 1200 --sizes 4,6
"""

import argparse
import os

from heraldtpc import SweepConfig, correctable_region, memory_effect, phase_boundary
from heraldtpc.cli import PHASE_HEADER, write_csv


def parse_args():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="results")
    ap.add_argument("--strategies", default="star,cross,snowflake")
    ap.add_argument("--ph-grid", default="0.5,0.7,0.9")
    ap.add_argument("--loss-grid", default="0,0.01,0.02,0.03,0.04")
    ap.add_argument("--err-grid",
                    default="0.004,0.008,0.012,0.016,0.02,0.024")
    ap.add_argument("--sizes", default="4,6")
    ap.add_argument("--trials", type=int, default=1200)
    ap.add_argument("--structures", type=int, default=16,
                    help="fusion structures sampled per boundary probe")
    ap.add_argument("--memory-ratio", type=float, default=0.1)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--workers", type=int, default=1)
    return ap.parse_args()


def main():
    args = parse_args()
    os.makedirs(args.outdir, exist_ok=True)
    base = SweepConfig(
        sizes=tuple(int(v) for v in args.sizes.split(",")),
        points=((0.0, 0.0),),
        trials=args.trials,
        seed=args.seed,
        channel="bond",
        workers=args.workers,
    )
    loss_grid = [float(v) for v in args.loss_grid.split(",")]
    err_grid = [float(v) for v in args.err_grid.split(",")]
    print("mapping correctable region ...")
    region, _ = correctable_region(loss_grid, err_grid, base)
    region_path = os.path.join(args.outdir, "region.csv")
    write_csv(region_path, "p_loss,p_err_max,ci,seed",
              [(pl, pe, region.err_step, args.seed)
               for pl, pe in zip(region.p_channel, region.p_err_max)])
    print(f"wrote {region_path}")

    ph_grid = [float(v) for v in args.ph_grid.split(",")]
    for strategy in args.strategies.split(","):
        for label, runner in (
            ("", lambda: phase_boundary(
                strategy, ph_grid, region, args.seed,
                n_structures=args.structures)),
            ("_mem", lambda: memory_effect(
                strategy, ph_grid, region, args.seed,
                ratio=args.memory_ratio, n_structures=args.structures)),
        ):
            pd = runner()
            path = os.path.join(args.outdir, f"phase_{strategy}{label}.csv")
            write_csv(path, PHASE_HEADER,
                      [(pd.strategy, ph, pg, n, q, args.seed)
                       for ph, pg, n, q in pd.rows])
            print(f"wrote {path}")
            for ph, pg, n, q in pd.rows:
                print(f"  {strategy}{label or '    '} p_h={ph:.3f} "
                      f"p_G_max={pg:.3e} N={n} qubits={q}")


if __name__ == "__main__":
    main()

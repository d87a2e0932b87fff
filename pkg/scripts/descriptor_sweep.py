#!/usr/bin/env python3
"""Sweep encoder configurations x place spacings on the synthetic corridor.

Thin wrapper over `hsd sweep`; writes sweep.csv (config, spacing, AUC,
cells, Hz) to the output directory for plotting descriptor-size
trade-offs.

Example:
    python3 scripts/descriptor_sweep.py --configs HSD-12,HSD-15,HSD-15/30,logpolar --out runs/sweep
"""
import argparse
import sys

from hsd.cli import main as hsd_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", type=int, default=200)
    ap.add_argument("--configs", default="HSD-12,HSD-15,HSD-18,logpolar")
    ap.add_argument("--spacing", default="2,3,5")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-pois", type=int, default=6)
    ap.add_argument("--epochs", type=int, default=3)
    ap.add_argument("--som-iterations", type=int, default=1500)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    return hsd_main(
        [
            "sweep",
            "--synth-frames", str(args.frames),
            "--seed", str(args.seed),
            "--configs", args.configs,
            "--spacing", args.spacing,
            "--max-pois", str(args.max_pois),
            "--epochs", str(args.epochs),
            "--som-iterations", str(args.som_iterations),
            "--out", args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())

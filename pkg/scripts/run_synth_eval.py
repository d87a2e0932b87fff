#!/usr/bin/env python3
"""Train and evaluate one encoder on the synthetic corridor.

Thin wrapper over `hsd eval`: learns on a clean pass, tests on a jittered
brightness-shifted revisit of the same world, and leaves pr_curve.csv,
report.json, fields.csv and memory.npz in the output directory.

Example:
    python3 scripts/run_synth_eval.py --frames 200 --tag HSD-15 --out runs/synth15
"""
import argparse
import sys

from hsd.cli import main as hsd_main


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--frames", type=int, default=200)
    ap.add_argument("--tag", default="HSD-15")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--vigilance", type=float, default=0.92)
    ap.add_argument("--max-pois", type=int, default=6)
    ap.add_argument("--epochs", type=int, default=3)
    ap.add_argument("--som-iterations", type=int, default=1500)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    return hsd_main(
        [
            "eval",
            "--synth-frames", str(args.frames),
            "--seed", str(args.seed),
            "--tag", args.tag,
            "--vigilance", str(args.vigilance),
            "--max-pois", str(args.max_pois),
            "--epochs", str(args.epochs),
            "--som-iterations", str(args.som_iterations),
            "--out", args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())

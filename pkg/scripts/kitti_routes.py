#!/usr/bin/env python3
"""Evaluate the built-in revisit routes on a local KITTI odometry checkout.

Expects the usual layout: <root>/sequences/<seq>/image_0/*.png and
<root>/poses/<seq>.txt. Route K0-1 lives in sequence 00, K5-1 and K5-2 in
sequence 05.

Example:
    python3 scripts/kitti_routes.py --root /data/kitti --route K5-1 --tag HSD-15 --out runs/k51
"""
import argparse
import sys
from pathlib import Path

from hsd.cli import main as hsd_main
from hsd.dataset import KITTI_ROUTES

SEQUENCE_OF = {"K0-1": "00", "K5-1": "05", "K5-2": "05"}


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--root", required=True)
    ap.add_argument("--route", choices=sorted(KITTI_ROUTES), default="K5-1")
    ap.add_argument("--tag", default="HSD-15")
    ap.add_argument("--vigilance", type=float, default=0.92)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()
    route = KITTI_ROUTES[args.route]
    seq = SEQUENCE_OF[args.route]
    root = Path(args.root)
    return hsd_main(
        [
            "eval",
            "--images", str(root / "sequences" / seq / "image_0"),
            "--poses", str(root / "poses" / f"{seq}.txt"),
            "--learn-range", f"{route.learn_range[0]}:{route.learn_range[1]}",
            "--test-range", f"{route.test_range[0]}:{route.test_range[1]}",
            "--tag", args.tag,
            "--vigilance", str(args.vigilance),
            "--out", args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())

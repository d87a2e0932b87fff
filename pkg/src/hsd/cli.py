"""Command-line entry point: train, eval, sweep, synth, dataset, inspect."""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
from PIL import Image

from . import dataset as ds
from . import evaluation as ev
from . import model_io
from .hierarchy import train_network
from .preprocessing import extract_landmarks
from .sparse import SparseLearnConfig
from .topology import SomConfig
from .vpr import PlaceMemory, VigilanceConfig

KNOWN_TAGS = [
    "HSD-12", "HSD-15", "HSD-18", "HSD-21", "HSD-24", "HSD-30", "HSD-15/30", "logpolar",
]


def parse_config_tag(tag: str) -> tuple[int, int] | None:
    """HSD-<atoms> or HSD-<atoms>/<grid> -> (atoms_side, grid_side); None = log-polar."""
    if tag.lower() in ("logpolar", "lpmp", "log-polar"):
        return None
    if not tag.startswith("HSD-"):
        raise ValueError(f"unknown config tag {tag!r}; valid tags: {', '.join(KNOWN_TAGS)}")
    body = tag[4:]
    try:
        if "/" in body:
            a, g = body.split("/")
            return int(a), int(g)
        return int(body), int(body)
    except ValueError as exc:
        raise ValueError(f"unknown config tag {tag!r}; valid tags: {', '.join(KNOWN_TAGS)}") from exc


def _load_config_file(path) -> dict:
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _merge_config(args: argparse.Namespace) -> dict:
    """Config file values fill in flags left at their defaults."""
    resolved = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    if getattr(args, "config", None):
        file_cfg = _load_config_file(args.config)
        for k, v in file_cfg.items():
            if k in resolved and resolved[k] is None:
                resolved[k] = v
    return resolved


def _write_resolved_config(out_dir: Path, resolved: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "config_resolved.json", "w") as f:
        json.dump({k: str(v) for k, v in sorted(resolved.items())}, f, indent=2)


def _detector_config(args) -> ev.DetectorConfig:
    s, l = (float(v) for v in args.dog_sigmas.split(","))
    return ev.DetectorConfig(
        patch_side=args.patch_side,
        max_pois=args.max_pois,
        nms_radius=args.nms_radius,
        dog_sigma_small=s,
        dog_sigma_large=l,
    )


def _load_frames(args, frame_range, det) -> list:
    if args.synth_frames:
        return ds.synth_sequence(args.synth_frames, args.seed)
    image_dir = args.images or os.environ.get("HSD_DATA_DIR")
    if not image_dir or not args.poses:
        raise SystemExit("need --images and --poses (or --synth-frames / HSD_DATA_DIR)")
    return ds.load_sequence(image_dir, args.poses, frame_range, headings_from_track=True)


def _parse_range(text: str) -> tuple[int, int]:
    a, b = text.split(":")
    return int(a), int(b)


def _collect_patches(frames, det: ev.DetectorConfig) -> list[np.ndarray]:
    patches = []
    for img, _pose in frames:
        patches.extend(p for _poi, p in extract_landmarks(
            img, det.patch_side, det.max_pois, det.nms_radius, det.dog_sigma_small, det.dog_sigma_large
        ))
    return patches


def _train_from_args(args, frames, det, atoms_side, grid_side, tag):
    patches = _collect_patches(frames, det)
    m_atoms = atoms_side * atoms_side
    epochs = max(1, math.ceil(20 * m_atoms / max(1, len(patches)))) if args.epochs is None else args.epochs
    s1_cfg = SparseLearnConfig(n0=args.n0_s1, epochs=epochs, seed=args.seed)
    s2_cfg = SparseLearnConfig(n0=args.n0_s2, epochs=epochs, seed=args.seed + 1)
    som_cfg = SomConfig(iterations=args.som_iterations, seed=args.seed)
    return train_network(
        patches, atoms_side, grid_side, s1_cfg, s2_cfg, som_cfg, args.pool, tag
    ), len(patches)


def cmd_train(args) -> int:
    det = _detector_config(args)
    atoms_side, grid_side = parse_config_tag(args.tag) if args.tag else (args.atoms, args.grid or args.atoms)
    tag = args.tag or (f"HSD-{atoms_side}" if atoms_side == grid_side else f"HSD-{atoms_side}/{grid_side}")
    frames = _load_frames(args, _parse_range(args.range) if args.range else (0, 0), det)
    net, n_patches = _train_from_args(args, frames, det, atoms_side, grid_side, tag)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    model_io.save_network(out, net)
    report = {
        "config_tag": tag,
        "n_patches": n_patches,
        "s1_reconstruction": net.s1_reconstruction,
        "s2_reconstruction": net.s2_reconstruction,
        "descriptor_length": net.descriptor_dim,
    }
    with open(out.with_suffix(".report.json"), "w") as f:
        json.dump(report, f, indent=2)
    _write_resolved_config(out.parent, _merge_config(args))
    print(json.dumps(report, indent=2))
    return 0


def _run_eval_once(args, det, spacing=None):
    if args.synth_frames:
        learn_frames = ds.synth_sequence(args.synth_frames, args.seed)
        test_frames = ds.synth_sequence(
            args.synth_frames, args.seed, jitter_px=1.0, brightness_offset=0.02, jitter_seed=args.seed + 7
        )
    else:
        learn_frames = _load_frames(args, _parse_range(args.learn_range), det)
        test_range = _parse_range(args.test_range)
        image_dir = args.images or os.environ.get("HSD_DATA_DIR")
        test_frames = ds.load_sequence(image_dir, args.poses, test_range, headings_from_track=True)
    if spacing:
        idx = ds.sample_places(learn_frames, spacing)
        learn_subset = [learn_frames[i] for i in idx]
    else:
        learn_subset = learn_frames

    tag = args.tag or "HSD-15"
    parsed = parse_config_tag(tag)
    if parsed is None:
        encode = lambda p: ev.logpolar_encode(p)
    elif args.model:
        net = model_io.load_network(args.model)
        encode = ev.make_encoder(net)
        tag = net.config_tag or tag
    else:
        net, _ = _train_from_args(args, learn_frames, det, parsed[0], parsed[1], tag)
        encode = ev.make_encoder(net)

    vcfg = VigilanceConfig(threshold=args.vigilance)
    report, memory, gt_map = ev.run_protocol(
        learn_subset, test_frames, encode, vcfg, args.tolerance, det, tag
    )
    return report, memory, gt_map, learn_subset, test_frames, encode, det


def _write_report_files(out_dir: Path, report, memory, gt_map, hz_rows=None):
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "pr_curve.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["threshold", "precision", "recall"])
        for p in report.pr_curve:
            w.writerow([f"{p.threshold:.9f}", f"{p.precision:.9f}", f"{p.recall:.9f}"])
    with open(out_dir / "report.json", "w") as f:
        body = asdict(report)
        body["pr_curve"] = [asdict(p) for p in report.pr_curve]
        json.dump(body, f, indent=2)
    with open(out_dir / "fields.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["cell", "frame"])
        for field in gt_map:
            for fr in sorted(field.extent):
                w.writerow([field.cell_index, fr])
    if hz_rows:
        with open(out_dir / "timing.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["n_cells", "hz"])
            for n_cells, hz in hz_rows:
                w.writerow([n_cells, f"{hz:.3f}"])


def cmd_eval(args) -> int:
    det = _detector_config(args)
    out_dir = Path(args.out)
    try:
        report, memory, gt_map, _lf, test_frames, encode, det = _run_eval_once(args, det)
    except (ValueError, OSError) as exc:
        print(f"eval failed: {exc}", file=sys.stderr)
        return 1
    hz = ev.benchmark_query(test_frames[: min(10, len(test_frames))], encode, memory, repeats=1, det=det)
    _write_report_files(out_dir, report, memory, gt_map, hz_rows=[(len(memory.cells), hz)])
    content_hash = model_io.save_place_memory(out_dir / "memory.npz", memory)
    resolved = _merge_config(args)
    resolved["memory_sha256"] = content_hash
    _write_resolved_config(out_dir, resolved)
    print(f"AUC {report.auc:.4f}  cells {report.cells_created}  ~{hz:.1f} Hz")
    return 0


def cmd_sweep(args) -> int:
    det = _detector_config(args)
    configs = [c.strip() for c in args.configs.split(",")]
    spacings = [float(s) for s in args.spacing.split(",")]
    for tag in configs:
        parse_config_tag(tag)  # fail fast on unknown tags
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for tag in configs:
        for spacing in spacings:
            args.tag = tag
            report, memory, gt_map, _lf, test_frames, encode, det2 = _run_eval_once(args, det, spacing)
            hz = ev.benchmark_query(test_frames[: min(10, len(test_frames))], encode, memory, repeats=1, det=det2)
            rows.append([tag, spacing, f"{report.auc:.6f}", report.cells_created, f"{hz:.3f}"])
            print(f"{tag} spacing {spacing}: AUC {report.auc:.4f}, {report.cells_created} cells")
    with open(out_dir / "sweep.csv", "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["config", "spacing_m", "auc", "cells", "hz"])
        w.writerows(rows)
    _write_resolved_config(out_dir, _merge_config(args))
    return 0


def cmd_synth(args) -> int:
    out = Path(args.out)
    for name, jitter, bright in (("learn", 0.0, 0.0), ("test", 1.0, 0.02)):
        sub = out / name
        sub.mkdir(parents=True, exist_ok=True)
        frames = ds.synth_sequence(
            args.frames, args.seed, jitter_px=jitter, brightness_offset=bright, jitter_seed=args.seed + 7
        )
        with open(sub / "poses.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["frame", "x", "y", "heading"])
            for img, pose in frames:
                Image.fromarray((img * 255).astype(np.uint8)).save(sub / f"{pose.frame_index:06d}.png")
                w.writerow([pose.frame_index, pose.x, pose.y, pose.heading])
    print(f"wrote {args.frames} learn/test frame pairs under {out}")
    return 0


def cmd_dataset(args) -> int:
    det = _detector_config(args)
    frames = _load_frames(args, _parse_range(args.range), det)
    dist = sum(
        math.hypot(b[1].x - a[1].x, b[1].y - a[1].y) for a, b in zip(frames, frames[1:])
    )
    print(f"{len(frames)} frames, {dist:.1f} m traveled")
    return 0


def cmd_inspect(args) -> int:
    net = model_io.load_network(args.model)
    for name, layer in (("s1", net.s1), ("s2", net.s2)):
        side = int(round(math.sqrt(layer.atoms.shape[1])))
        tile = side if side * side == layer.atoms.shape[1] else None
        rows, cols = layer.grid.rows, layer.grid.cols
        cell = tile or 16
        canvas = np.full((rows * (cell + 1) + 1, cols * (cell + 1) + 1), 0.5)
        for i, (r, c) in layer.grid.atom_assignment.items():
            atom = layer.atoms[i]
            if tile:
                img = atom.reshape(tile, tile)
            else:
                img = np.resize(atom, (cell, cell))
            lo, hi = img.min(), img.max()
            img = (img - lo) / (hi - lo) if hi - lo > 1e-12 else np.zeros_like(img)
            y, x = r * (cell + 1) + 1, c * (cell + 1) + 1
            canvas[y:y + cell, x:x + cell] = img
        out = Path(args.out) / f"atoms_{name}.png"
        out.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray((canvas * 255).astype(np.uint8)).save(out)
        print(f"wrote {out}")
    return 0


def _add_detector_flags(p):
    p.add_argument("--patch-side", type=int, default=32)
    p.add_argument("--max-pois", type=int, default=20)
    p.add_argument("--nms-radius", type=float, default=16.0)
    p.add_argument("--dog-sigmas", default="1,2", metavar="S,L")


def _add_data_flags(p):
    p.add_argument("--images", default=None)
    p.add_argument("--poses", default=None)
    p.add_argument("--synth-frames", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", default=None, help="key = value config file merged under flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hsd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train an HSD network on landmark patches")
    _add_data_flags(p)
    _add_detector_flags(p)
    p.add_argument("--range", default=None, metavar="A:B")
    p.add_argument("--tag", default=None, help="config tag, e.g. HSD-15 or HSD-15/30")
    p.add_argument("--atoms", type=int, default=15)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--n0-s1", type=int, default=10)
    p.add_argument("--n0-s2", type=int, default=5)
    p.add_argument("--pool", type=int, default=2)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--som-iterations", type=int, default=3000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="run the three-phase evaluation protocol")
    _add_data_flags(p)
    _add_detector_flags(p)
    p.add_argument("--learn-range", default=None, metavar="A:B")
    p.add_argument("--test-range", default=None, metavar="A:B")
    p.add_argument("--model", default=None)
    p.add_argument("--tag", default=None)
    p.add_argument("--atoms", type=int, default=15)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--n0-s1", type=int, default=10)
    p.add_argument("--n0-s2", type=int, default=5)
    p.add_argument("--pool", type=int, default=2)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--som-iterations", type=int, default=3000)
    p.add_argument("--vigilance", type=float, default=0.92)
    p.add_argument("--tolerance", type=float, default=ev.DEFAULT_TOLERANCE_M)
    p.add_argument("--jobs", type=int, default=os.cpu_count())
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="eval a list of configs x place spacings")
    _add_data_flags(p)
    _add_detector_flags(p)
    p.add_argument("--learn-range", default=None, metavar="A:B")
    p.add_argument("--test-range", default=None, metavar="A:B")
    p.add_argument("--model", default=None)
    p.add_argument("--configs", required=True, help="comma list, e.g. HSD-15,HSD-18,logpolar")
    p.add_argument("--spacing", default="2,3,5")
    p.add_argument("--atoms", type=int, default=15)
    p.add_argument("--grid", type=int, default=None)
    p.add_argument("--n0-s1", type=int, default=10)
    p.add_argument("--n0-s2", type=int, default=5)
    p.add_argument("--pool", type=int, default=2)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--som-iterations", type=int, default=3000)
    p.add_argument("--vigilance", type=float, default=0.92)
    p.add_argument("--tolerance", type=float, default=ev.DEFAULT_TOLERANCE_M)
    p.add_argument("--jobs", type=int, default=os.cpu_count())
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate a synthetic corridor learn/test pair")
    p.add_argument("--frames", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dataset", help="summarize a sequence slice")
    _add_data_flags(p)
    _add_detector_flags(p)
    p.add_argument("--range", required=True, metavar="A:B")
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("inspect", help="render atom galleries laid out by SOM position")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_inspect)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

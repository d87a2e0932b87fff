"""Sequence ingestion (KITTI-odometry style) and synthetic corridor generation."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .preprocessing import load_gray

log = logging.getLogger(__name__)

DEFAULT_WIDTH = 642
DEFAULT_HEIGHT = 188


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    heading: float  # degrees
    frame_index: int


@dataclass(frozen=True)
class RouteSpec:
    name: str
    learn_range: tuple[int, int]
    test_range: tuple[int, int]
    distance_m: float


# Table of revisit routes used by the evaluation harness (frame index ranges
# inclusive on both ends).
KITTI_ROUTES = {
    "K0-1": RouteSpec("K0-1", (392, 932), (3399, 3839), 378.0),
    "K5-1": RouteSpec("K5-1", (10, 116), (2420, 2511), 96.0),
    "K5-2": RouteSpec("K5-2", (550, 780), (1289, 1554), 199.0),
}


def parse_poses(poses_file) -> list[Pose]:
    """Parse a pose file.

    Supports KITTI odometry format (12 floats per line, row-major 3x4
    matrix; ground-plane position is (tx, tz)) and a CSV alternative
    `frame,x,y,heading` selected by the .csv extension.
    """
    path = Path(poses_file)
    poses: list[Pose] = []
    if path.suffix.lower() == ".csv":
        for line in path.read_text().strip().splitlines():
            if line.startswith("frame"):
                continue
            f, x, y, h = line.split(",")
            poses.append(Pose(float(x), float(y), float(h), int(f)))
        return poses
    rows = np.loadtxt(path)
    rows = np.atleast_2d(rows)
    if rows.shape[1] != 12:
        raise ValueError(f"expected 12 values per pose line, got {rows.shape[1]}")
    xs, ys = rows[:, 3], rows[:, 11]
    for i in range(len(rows)):
        # forward axis (camera z) in world coordinates gives the heading
        fz_x, fz_z = rows[i, 2], rows[i, 10]
        heading = math.degrees(math.atan2(fz_x, fz_z))
        poses.append(Pose(float(xs[i]), float(ys[i]), heading, i))
    return poses


def derive_headings(poses: list[Pose]) -> list[Pose]:
    """Replace headings by atan2 of consecutive displacements."""
    out = []
    for i, p in enumerate(poses):
        j = min(i + 1, len(poses) - 1)
        k = max(j - 1, 0)
        dx, dy = poses[j].x - poses[k].x, poses[j].y - poses[k].y
        h = math.degrees(math.atan2(dx, dy)) if (dx, dy) != (0.0, 0.0) else p.heading
        out.append(Pose(p.x, p.y, h, p.frame_index))
    return out


def load_sequence(
    image_dir,
    poses_file,
    frame_range: tuple[int, int],
    target_width: int = DEFAULT_WIDTH,
    target_height: int = DEFAULT_HEIGHT,
    headings_from_track: bool = False,
) -> list[tuple[np.ndarray, Pose]]:
    """Load the frames of a range (inclusive) with their poses.

    Image files are looked up as <index>.png/.jpg/.pgm with 6- or 10-digit
    zero padding. Missing images are skipped with a warning; a missing
    pose is a hard error.
    """
    start, end = frame_range
    if start >= end:
        raise ValueError("empty frame range")
    poses = parse_poses(poses_file)
    if headings_from_track:
        poses = derive_headings(poses)
    by_index = {p.frame_index: p for p in poses}
    image_dir = Path(image_dir)
    frames = []
    for idx in range(start, end + 1):
        if idx not in by_index:
            raise ValueError(f"no pose for frame {idx}")
        path = _find_image(image_dir, idx)
        if path is None:
            log.warning("missing image for frame %d, skipped", idx)
            continue
        frames.append((load_gray(path, target_width, target_height), by_index[idx]))
    return frames


def _find_image(image_dir: Path, idx: int) -> Path | None:
    for pad in (6, 10, 0):
        for ext in (".png", ".jpg", ".jpeg", ".pgm"):
            p = image_dir / f"{idx:0{pad}d}{ext}"
            if p.exists():
                return p
    return None


def sample_places(frames: list[tuple[np.ndarray, Pose]], spacing_m: float) -> list[int]:
    """Greedy arc-length sampling: keep a frame once spacing_m has been traveled."""
    if not frames:
        return []
    picked = [0]
    acc = 0.0
    for i in range(1, len(frames)):
        p, q = frames[i - 1][1], frames[i][1]
        acc += math.hypot(q.x - p.x, q.y - p.y)
        if acc >= spacing_m:
            picked.append(i)
            acc = 0.0
    return picked


def synth_sequence(
    n_frames: int,
    world_seed: int,
    width: int = 200,
    height: int = 96,
    speed_px: int = 12,
    meters_per_px: float = 0.1,
    jitter_px: float = 0.0,
    brightness_offset: float = 0.0,
    jitter_seed: int = 0,
) -> list[tuple[np.ndarray, Pose]]:
    """Procedural corridor: a camera translating along a fixed textured wall.

    The world is a long horizontal texture of blobs at fixed positions;
    frame t is a window at offset t * speed_px (plus optional sub-frame
    jitter and brightness offset for a revisit pass). Ground truth is
    exact: x = offset * meters_per_px, y = 0, heading = 0.
    """
    if n_frames <= 0:
        return []
    world_len = width + n_frames * speed_px + 8
    rng = np.random.default_rng(world_seed)
    world = _render_world(rng, world_len, height)
    jrng = np.random.default_rng(jitter_seed + 1)
    frames = []
    for t in range(n_frames):
        off = t * speed_px
        if jitter_px > 0:
            off = int(np.clip(off + jrng.integers(-round(jitter_px), round(jitter_px) + 1), 0, world_len - width))
        img = np.clip(world[:, off:off + width] + brightness_offset, 0.0, 1.0)
        pose = Pose(x=t * speed_px * meters_per_px, y=0.0, heading=0.0, frame_index=t)
        frames.append((img, pose))
    return frames


def _render_world(rng: np.random.Generator, length: int, height: int) -> np.ndarray:
    """Textured wall: oriented Gabor-like blobs on a smooth background."""
    yy, xx = np.mgrid[0:height, 0:length].astype(np.float64)
    world = 0.5 + 0.05 * np.sin(2 * np.pi * xx / (length / 3.0))
    n_blobs = max(8, length // 40)
    for _ in range(n_blobs):
        cx = rng.uniform(0, length)
        cy = rng.uniform(height * 0.15, height * 0.85)
        theta = rng.uniform(0, np.pi)
        freq = rng.uniform(0.08, 0.25)
        sigma = rng.uniform(4, 10)
        amp = rng.uniform(0.2, 0.45)
        u = (xx - cx) * np.cos(theta) + (yy - cy) * np.sin(theta)
        v = -(xx - cx) * np.sin(theta) + (yy - cy) * np.cos(theta)
        world += amp * np.exp(-(u**2 + v**2) / (2 * sigma**2)) * np.cos(2 * np.pi * freq * u)
    return np.clip(world, 0.0, 1.0)

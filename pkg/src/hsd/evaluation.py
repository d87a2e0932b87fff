"""Three-phase evaluation protocol: learning, recording, test.

The learning phase builds the place memory along the first traversal.
The recording phase replays the same frames with learning disabled to
chart complete place fields, which become the ground-truth map. The test
phase runs the second traversal and scores predictions by spatial
proximity to the predicted cell's recorded field, sweeping an activity
threshold to trace a precision-recall curve.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dataset import Pose
from .hierarchy import HsdNetwork, encode_landmark
from .preprocessing import extract_landmarks
from .vpr import (
    PlaceMemory,
    azimuth_activity,
    build_pattern,
    localize,
    vigilance_step,
)

DEFAULT_TOLERANCE_M = 1.77  # mean + std of the assumed GPS imprecision


@dataclass
class PlaceField:
    cell_index: int
    creation_frame: int
    extent: list[int] = field(default_factory=list)
    positions: list[tuple[float, float]] = field(default_factory=list)


@dataclass(frozen=True)
class PrPoint:
    threshold: float
    precision: float
    recall: float


@dataclass
class EvalReport:
    auc: float
    pr_curve: list[PrPoint]
    query_frequency_hz: float
    cells_created: int
    config_tag: str


@dataclass(frozen=True)
class DetectorConfig:
    patch_side: int = 32
    max_pois: int = 20
    nms_radius: float = 16.0
    dog_sigma_small: float = 1.0
    dog_sigma_large: float = 2.0
    hfov_deg: float = 90.0
    a_bins: int = 180
    sigma_bins: float = 2.0


def frame_observations(
    img: np.ndarray,
    pose: Pose,
    encode,
    det: DetectorConfig,
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Detector + encoder + azimuth path for one frame."""
    width = img.shape[1]
    obs = []
    for poi, patch in extract_landmarks(
        img, det.patch_side, det.max_pois, det.nms_radius, det.dog_sigma_small, det.dog_sigma_large
    ):
        desc = encode(patch)
        azi = azimuth_activity(pose.heading, poi.x, width, det.hfov_deg, det.sigma_bins, det.a_bins)
        obs.append((desc, azi))
    return obs


def make_encoder(net: HsdNetwork):
    return lambda patch: encode_landmark(net, patch)


def run_learning_phase(
    frames: list[tuple[np.ndarray, Pose]],
    encode,
    memory: PlaceMemory,
    det: DetectorConfig = DetectorConfig(),
) -> PlaceMemory:
    """Feed frames with vigilance-gated recruitment enabled."""
    for img, pose in frames:
        obs = frame_observations(img, pose, encode, det)
        if not obs:
            continue
        pattern = build_pattern(memory, obs, learn=True)
        vigilance_step(memory, pattern, pose.frame_index, (pose.x, pose.y))
    return memory


def run_recording_phase(
    frames: list[tuple[np.ndarray, Pose]],
    encode,
    memory: PlaceMemory,
    det: DetectorConfig = DetectorConfig(),
) -> list[PlaceField]:
    """Replay the learning frames frozen; chart each cell's full place field."""
    fields = {
        k: PlaceField(cell_index=k, creation_frame=c.creation_index)
        for k, c in enumerate(memory.cells)
    }
    for img, pose in frames:
        obs = frame_observations(img, pose, encode, det)
        if not obs:
            continue
        pattern = build_pattern(memory, obs, learn=False)
        best, _ = localize(memory, pattern)
        fields[best].extent.append(pose.frame_index)
        fields[best].positions.append((pose.x, pose.y))
    # a cell always covers its own creation point
    by_index = {p.frame_index: p for _, p in frames}
    for f in fields.values():
        if f.creation_frame not in f.extent and f.creation_frame in by_index:
            p = by_index[f.creation_frame]
            f.extent.append(f.creation_frame)
            f.positions.append((p.x, p.y))
    return [fields[k] for k in sorted(fields)]


def _correct(pred_field: PlaceField, pos: tuple[float, float], tolerance_m: float) -> bool:
    return any(
        math.hypot(pos[0] - fx, pos[1] - fy) <= tolerance_m for fx, fy in pred_field.positions
    )


def pr_curve_from_predictions(
    activities: list[float], correct: list[bool]
) -> list[PrPoint]:
    """Sweep the activity threshold over all observed values."""
    n = len(activities)
    thresholds = sorted(set(activities) | {0.0})
    pts = []
    for tau in thresholds:
        retrieved = [c for a, c in zip(activities, correct) if a >= tau]
        tp = sum(retrieved)
        precision = tp / len(retrieved) if retrieved else 1.0
        recall = tp / n if n else 0.0
        pts.append(PrPoint(threshold=tau, precision=precision, recall=recall))
    return pts


def auc(curve: list[PrPoint]) -> float:
    """Trapezoid over recall-sorted points, clipped to [0, 1]."""
    pts = sorted(curve, key=lambda p: (p.recall, -p.precision))
    if not pts:
        return 0.0
    rec = [0.0] + [p.recall for p in pts]
    prec = [pts[0].precision] + [p.precision for p in pts]
    area = sum(
        (rec[i + 1] - rec[i]) * (prec[i + 1] + prec[i]) / 2.0 for i in range(len(pts))
    )
    return float(np.clip(area, 0.0, 1.0))


def run_test_phase(
    test_frames: list[tuple[np.ndarray, Pose]],
    encode,
    memory: PlaceMemory,
    gt_map: list[PlaceField],
    tolerance_m: float = DEFAULT_TOLERANCE_M,
    det: DetectorConfig = DetectorConfig(),
    config_tag: str = "",
) -> EvalReport:
    """Localize every test frame and score against the recorded place fields."""
    fields = {f.cell_index: f for f in gt_map}
    activities: list[float] = []
    correct: list[bool] = []
    t0 = time.perf_counter()
    n_queries = 0
    for img, pose in test_frames:
        obs = frame_observations(img, pose, encode, det)
        if not obs:
            activities.append(0.0)
            correct.append(False)
            continue
        pattern = build_pattern(memory, obs, learn=False)
        best, act = localize(memory, pattern)
        n_queries += 1
        activities.append(act)
        correct.append(_correct(fields[best], (pose.x, pose.y), tolerance_m))
    elapsed = time.perf_counter() - t0
    curve = pr_curve_from_predictions(activities, correct)
    return EvalReport(
        auc=auc(curve),
        pr_curve=curve,
        query_frequency_hz=n_queries / elapsed if elapsed > 0 else 0.0,
        cells_created=len(memory.cells),
        config_tag=config_tag,
    )


def benchmark_query(
    frames: list[tuple[np.ndarray, Pose]],
    encode,
    memory: PlaceMemory,
    repeats: int = 3,
    det: DetectorConfig = DetectorConfig(),
) -> float:
    """Median over repeats of the full per-frame query frequency (Hz)."""
    rates = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for img, pose in frames:
            obs = frame_observations(img, pose, encode, det)
            if obs:
                localize(memory, build_pattern(memory, obs, learn=False))
        dt = time.perf_counter() - t0
        rates.append(len(frames) / dt if dt > 0 else 0.0)
    return float(np.median(rates))


def logpolar_encode(patch: np.ndarray, rings: int = 54, wedges: int = 54) -> np.ndarray:
    """Log-polar resampled patch, flattened and L2-normalized.

    Radii are log-spaced from 1 px to half the patch side; each (ring,
    wedge) bin samples the patch bilinearly at its centre.
    """
    side = patch.shape[0]
    r_max = side / 2.0
    radii = np.exp(np.linspace(np.log(1.0), np.log(r_max), rings))
    angles = np.arange(wedges) * (2 * np.pi / wedges)
    cy = cx = (side - 1) / 2.0
    out = np.empty((rings, wedges))
    for i, r in enumerate(radii):
        xs = cx + r * np.cos(angles)
        ys = cy + r * np.sin(angles)
        out[i] = _bilinear_sample(patch, xs, ys)
    flat = out.ravel()
    n = np.linalg.norm(flat)
    return flat / n if n > 1e-12 else flat


def _bilinear_sample(img: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    h, w = img.shape
    xs = np.clip(xs, 0, w - 1)
    ys = np.clip(ys, 0, h - 1)
    x0 = np.floor(xs).astype(int)
    y0 = np.floor(ys).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx, fy = xs - x0, ys - y0
    return (
        img[y0, x0] * (1 - fx) * (1 - fy)
        + img[y0, x1] * fx * (1 - fy)
        + img[y1, x0] * (1 - fx) * fy
        + img[y1, x1] * fx * fy
    )


def cosine_mac_count(descriptor_dim: int, n_landmarks: int = 1) -> int:
    """Multiply-accumulate count for cosine matching one landmark against a store."""
    return descriptor_dim * n_landmarks


def run_protocol(
    learn_frames: list[tuple[np.ndarray, Pose]],
    test_frames: list[tuple[np.ndarray, Pose]],
    encode,
    vigilance_cfg,
    tolerance_m: float = DEFAULT_TOLERANCE_M,
    det: DetectorConfig = DetectorConfig(),
    config_tag: str = "",
    a_bins: int | None = None,
) -> tuple[EvalReport, PlaceMemory, list[PlaceField]]:
    """Full learning/recording/test pipeline for one encoder and route."""
    memory = PlaceMemory(a_bins=a_bins or det.a_bins, config=vigilance_cfg)
    run_learning_phase(learn_frames, encode, memory, det)
    gt_map = run_recording_phase(learn_frames, encode, memory, det)
    report = run_test_phase(test_frames, encode, memory, gt_map, tolerance_m, det, config_tag)
    return report, memory, gt_map


def compare_encoders(
    learn_frames,
    test_frames,
    encoders: list[tuple[str, object]],
    vigilance_cfg,
    tolerance_m: float = DEFAULT_TOLERANCE_M,
    det: DetectorConfig = DetectorConfig(),
) -> list[EvalReport]:
    """Identical protocol per encoder; constant detector and VPR settings."""
    return [
        run_protocol(learn_frames, test_frames, enc, vigilance_cfg, tolerance_m, det, name)[0]
        for name, enc in encoders
    ]

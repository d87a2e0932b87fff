import numpy as np
import pytest

from hsd import dataset as ds
from hsd.evaluation import DetectorConfig
from hsd.hierarchy import train_network
from hsd.preprocessing import PointOfInterest, detect_pois, extract_patch, saliency_map
from hsd.sparse import SparseLearnConfig
from hsd.topology import SomConfig

DET = DetectorConfig(max_pois=8)


def collect_patches(frames, det=DET, shifts=(0,)):
    patches = []
    for img, _pose in frames:
        sal = saliency_map(img, det.dog_sigma_small, det.dog_sigma_large)
        for poi in detect_pois(sal, det.max_pois, det.nms_radius):
            for dx in shifts:
                try:
                    patches.append(
                        extract_patch(img, PointOfInterest(poi.x + dx, poi.y, poi.saliency), det.patch_side)
                    )
                except ValueError:
                    continue
    return patches


@pytest.fixture(scope="session")
def corridor_frames():
    return ds.synth_sequence(120, world_seed=0)


@pytest.fixture(scope="session")
def train_patches(corridor_frames):
    return collect_patches(corridor_frames)


@pytest.fixture(scope="session")
def shift_pairs():
    """Held-out (patch, 1-px-shifted patch) pairs from a different world."""
    frames = ds.synth_sequence(80, world_seed=99)
    pairs = []
    for img, _pose in frames:
        sal = saliency_map(img, 1.0, 2.0)
        for poi in detect_pois(sal, 8, 16.0):
            try:
                p0 = extract_patch(img, poi, 32)
                p1 = extract_patch(img, PointOfInterest(poi.x + 1, poi.y, poi.saliency), 32)
            except ValueError:
                continue
            pairs.append((p0, p1))
    return pairs[:500]


@pytest.fixture(scope="session")
def hsd15_net(train_patches):
    """Small-budget HSD-15 network shared across module tests."""
    return train_network(
        train_patches,
        atoms_side=15,
        grid_side=15,
        s1_cfg=SparseLearnConfig(n0=10, epochs=2, seed=0),
        s2_cfg=SparseLearnConfig(n0=5, epochs=2, seed=1),
        som_cfg=SomConfig(iterations=2000, seed=0),
        pool_size=2,
        config_tag="HSD-15",
    )


@pytest.fixture(scope="session")
def net_1530(corridor_frames):
    """HSD-15/30 trained on densely sampled (0 and +1 px) patches."""
    patches = collect_patches(corridor_frames[:60], shifts=(0, 1))
    return train_network(
        patches,
        atoms_side=15,
        grid_side=30,
        s1_cfg=SparseLearnConfig(n0=10, epochs=4, seed=0),
        s2_cfg=SparseLearnConfig(n0=5, epochs=4, seed=1),
        som_cfg=SomConfig(iterations=5000, seed=0),
        pool_size=2,
        config_tag="HSD-15/30",
    )


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance-criterion verdict lines after the test run."""
    try:
        from test_acceptance import ACCEPTANCE_LINES
    except ImportError:
        return
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


def cosine(a, b):
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na < 1e-12 or nb < 1e-12:
        return 0.0
    return float(a @ b / (na * nb))

import numpy as np
import pytest

from hsd import dataset as ds
from hsd.evaluation import (
    DEFAULT_TOLERANCE_M,
    DetectorConfig,
    PlaceField,
    PrPoint,
    auc,
    benchmark_query,
    cosine_mac_count,
    frame_observations,
    logpolar_encode,
    make_encoder,
    pr_curve_from_predictions,
    run_learning_phase,
    run_protocol,
    run_recording_phase,
    run_test_phase,
)
from hsd.vpr import PlaceMemory, VigilanceConfig

from conftest import DET


class TestPrCurve:
    def test_all_correct_all_confident(self):
        pts = pr_curve_from_predictions([0.9, 0.8, 0.95], [True, True, True])
        for p in pts:
            assert p.precision == 1.0
        assert max(p.recall for p in pts) == 1.0

    def test_hand_computed_mixed_case(self):
        acts = [0.9, 0.8, 0.7, 0.6]
        correct = [True, True, False, True]
        pts = {p.threshold: p for p in pr_curve_from_predictions(acts, correct)}
        # tau = 0.8: retrieved {0.9 T, 0.8 T} -> precision 1, recall 2/4
        assert pts[0.8].precision == pytest.approx(1.0)
        assert pts[0.8].recall == pytest.approx(0.5)
        # tau = 0.7: retrieved 3, tp 2
        assert pts[0.7].precision == pytest.approx(2 / 3)
        assert pts[0.7].recall == pytest.approx(0.5)
        # tau = 0.6: all 4 retrieved, tp 3
        assert pts[0.6].precision == pytest.approx(0.75)
        assert pts[0.6].recall == pytest.approx(0.75)

    def test_nothing_retrieved_precision_one(self):
        pts = pr_curve_from_predictions([0.3], [False])
        top = max(pts, key=lambda p: p.threshold)
        # threshold above every activity retrieves nothing
        assert pr_curve_from_predictions([], [])[0].precision == 1.0

    def test_empty_predictions(self):
        pts = pr_curve_from_predictions([], [])
        assert len(pts) == 1
        assert pts[0].recall == 0.0


class TestAuc:
    def test_perfect_curve(self):
        curve = [PrPoint(0.0, 1.0, 1.0), PrPoint(0.9, 1.0, 0.5)]
        assert auc(curve) == pytest.approx(1.0)

    def test_empty(self):
        assert auc([]) == 0.0

    def test_hand_trapezoid(self):
        # (recall, precision): (0, 1) -> (0.5, 1) -> (1, 0.5)
        curve = [
            PrPoint(0.9, 1.0, 0.0),
            PrPoint(0.5, 1.0, 0.5),
            PrPoint(0.0, 0.5, 1.0),
        ]
        # area = 0.5*1 + 0.5*(1+0.5)/2 = 0.875
        assert auc(curve) == pytest.approx(0.875)

    def test_clipped_to_unit(self):
        assert 0.0 <= auc([PrPoint(0.0, 1.0, 1.0)]) <= 1.0


class TestLogpolarEncode:
    def test_shape_and_norm(self):
        patch = np.random.default_rng(0).random((32, 32))
        d = logpolar_encode(patch)
        assert d.shape == (54 * 54,)
        assert np.linalg.norm(d) == pytest.approx(1.0)

    def test_constant_patch_direction(self):
        d = logpolar_encode(np.full((32, 32), 0.5))
        assert np.allclose(d, 1.0 / np.sqrt(54 * 54))

    def test_matches_bruteforce_sampling(self):
        """Independent scalar-loop oracle over log-spaced radii and wedge angles."""
        rng = np.random.default_rng(1)
        patch = rng.random((16, 16))
        rings, wedges = 6, 8
        got = logpolar_encode(patch, rings=rings, wedges=wedges)
        cy = cx = (16 - 1) / 2.0
        radii = np.exp(np.linspace(np.log(1.0), np.log(8.0), rings))
        raw = np.empty((rings, wedges))
        for i, r in enumerate(radii):
            for j in range(wedges):
                ang = 2 * np.pi * j / wedges
                x = min(max(cx + r * np.cos(ang), 0.0), 15.0)
                y = min(max(cy + r * np.sin(ang), 0.0), 15.0)
                x0, y0 = int(np.floor(x)), int(np.floor(y))
                x1, y1 = min(x0 + 1, 15), min(y0 + 1, 15)
                fx, fy = x - x0, y - y0
                raw[i, j] = (
                    patch[y0, x0] * (1 - fx) * (1 - fy)
                    + patch[y0, x1] * fx * (1 - fy)
                    + patch[y1, x0] * (1 - fx) * fy
                    + patch[y1, x1] * fx * fy
                )
        expect = raw.ravel() / np.linalg.norm(raw)
        assert np.allclose(got, expect, atol=1e-12)

    def test_zero_patch(self):
        d = logpolar_encode(np.zeros((16, 16)))
        assert np.all(d == 0.0)


class TestCosineMacCount:
    def test_values(self):
        assert cosine_mac_count(64) == 64
        assert cosine_mac_count(225, 10) == 2250
        assert cosine_mac_count(2916) / cosine_mac_count(225) == pytest.approx(12.96)


class TestFrameObservations:
    def test_observation_structure(self, corridor_frames, hsd15_net):
        img, pose = corridor_frames[0]
        obs = frame_observations(img, pose, make_encoder(hsd15_net), DET)
        assert 0 < len(obs) <= DET.max_pois
        for desc, azi in obs:
            assert desc.shape == (hsd15_net.descriptor_dim,)
            assert azi.shape == (DET.a_bins,)
            assert azi.max() == pytest.approx(1.0)

    def test_blank_image_no_observations(self, hsd15_net):
        img = np.full((96, 200), 0.5)
        pose = ds.Pose(0.0, 0.0, 0.0, 0)
        assert frame_observations(img, pose, make_encoder(hsd15_net), DET) == []


@pytest.fixture(scope="module")
def small_protocol(corridor_frames, hsd15_net):
    learn = corridor_frames[:40]
    memory = PlaceMemory(config=VigilanceConfig(threshold=0.92))
    encode = make_encoder(hsd15_net)
    run_learning_phase(learn, encode, memory, DET)
    gt_map = run_recording_phase(learn, encode, memory, DET)
    return learn, memory, gt_map, encode


class TestPhases:
    def test_learning_creates_cells_and_signatures(self, small_protocol):
        _, memory, _, _ = small_protocol
        assert len(memory.cells) >= 2
        assert len(memory.signatures) >= len(memory.cells) // 2

    def test_recording_covers_every_frame(self, small_protocol):
        learn, _, gt_map, _ = small_protocol
        covered = sorted(i for f in gt_map for i in f.extent)
        assert set(covered) == {p.frame_index for _, p in learn}

    def test_recording_is_frozen(self, small_protocol, corridor_frames):
        learn, memory, _, encode = small_protocol
        before = memory.state_hash()
        run_recording_phase(learn, encode, memory, DET)
        assert memory.state_hash() == before

    def test_fields_include_creation_frame(self, small_protocol):
        _, _, gt_map, _ = small_protocol
        for f in gt_map:
            assert f.creation_frame in f.extent
            assert len(f.extent) == len(f.positions)

    def test_exact_revisit_high_auc(self, small_protocol):
        learn, memory, gt_map, encode = small_protocol
        report = run_test_phase(learn, encode, memory, gt_map, det=DET, config_tag="HSD-15")
        assert report.auc > 0.95
        assert report.config_tag == "HSD-15"
        assert report.query_frequency_hz > 0
        assert report.cells_created == len(memory.cells)

    def test_shifted_gt_low_precision(self, small_protocol):
        """Moving every recorded field far away makes all predictions wrong."""
        learn, memory, gt_map, encode = small_protocol
        bogus = [
            PlaceField(f.cell_index, f.creation_frame, list(f.extent), [(x + 1e6, y) for x, y in f.positions])
            for f in gt_map
        ]
        report = run_test_phase(learn, encode, memory, bogus, det=DET)
        assert report.auc < 0.05


class TestRunProtocol:
    def test_end_to_end_and_benchmark(self, corridor_frames, hsd15_net):
        learn = corridor_frames[:30]
        # same n_frames as the learning sequence so the rendered world matches
        test = ds.synth_sequence(120, world_seed=0, jitter_px=1.0, brightness_offset=0.02, jitter_seed=5)[:30]
        report, memory, gt_map = run_protocol(
            learn, test, make_encoder(hsd15_net), VigilanceConfig(threshold=0.92), det=DET, config_tag="HSD-15"
        )
        assert 0.0 <= report.auc <= 1.0
        assert report.auc > 0.5  # mild perturbation of the same corridor
        assert len(gt_map) == len(memory.cells)
        hz = benchmark_query(test[:5], make_encoder(hsd15_net), memory, repeats=2, det=DET)
        assert hz > 0

    def test_tolerance_constant(self):
        assert DEFAULT_TOLERANCE_M == pytest.approx(1.77)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsd.hierarchy import (
    HsdNetwork,
    TslLayer,
    descriptor_length,
    encode_landmark,
    max_pool,
    s1_raw_descriptor,
    train_network,
)
from hsd.sparse import SparseLearnConfig
from hsd.topology import SomGrid

from conftest import cosine


class TestMaxPool:
    def test_exact_tiling(self):
        act = np.array(
            [
                [1, 2, 5, 0],
                [3, 4, 1, 1],
                [0, 0, 2, 9],
                [7, 0, 0, 0],
            ],
            dtype=float,
        )
        out = max_pool(act, 2)
        assert np.array_equal(out, np.array([[4.0, 5.0], [7.0, 9.0]]))

    def test_odd_side_zero_pad(self):
        act = np.arange(9, dtype=float).reshape(3, 3)
        out = max_pool(act, 2)
        assert out.shape == (2, 2)
        assert np.array_equal(out, np.array([[4.0, 5.0], [7.0, 8.0]]))

    def test_pool_one_identity(self):
        act = np.random.default_rng(0).random((5, 5))
        assert np.array_equal(max_pool(act, 1), act)

    def test_bad_pool(self):
        with pytest.raises(ValueError):
            max_pool(np.zeros((2, 2)), 0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.integers(2, 9), st.integers(2, 4))
    def test_matches_bruteforce(self, seed, side, pool):
        act = np.random.default_rng(seed).random((side, side))
        out = max_pool(act, pool)
        out_side = -(-side // pool)
        assert out.shape == (out_side, out_side)
        for r in range(out_side):
            for c in range(out_side):
                block = act[r * pool : (r + 1) * pool, c * pool : (c + 1) * pool]
                assert out[r, c] == pytest.approx(block.max())

    def test_nonnegative_input_pool_dominates(self):
        act = np.random.default_rng(1).random((6, 6))
        out = max_pool(act, 3)
        assert out.max() == pytest.approx(act.max())


class TestDescriptorLength:
    @pytest.mark.parametrize(
        "atoms_side,grid_side,expect",
        [
            (12, 12, 36),
            (15, 15, 64),
            (18, 18, 81),
            (24, 24, 144),
            (30, 30, 225),
            (15, 30, 225),
        ],
    )
    def test_configuration_table(self, atoms_side, grid_side, expect):
        assert descriptor_length(atoms_side, grid_side) == expect

    def test_pool_three(self):
        assert descriptor_length(12, 12, pool=3) == 16


class TestTslLayer:
    def test_projection_places_activity_at_assigned_cells(self):
        atoms = np.eye(4)
        grid = SomGrid(2, 2, atoms.copy(), {0: (0, 0), 1: (0, 1), 2: (1, 0), 3: (1, 1)})
        layer = TslLayer(atoms, grid, n0=2)
        act = layer.project(np.array([0.0, 0.9, 0.0, -0.4]))
        assert act[0, 1] == pytest.approx(0.9)
        assert act[1, 1] == pytest.approx(0.4)
        assert act[0, 0] == act[1, 0] == 0.0


class TestTrainNetwork:
    def test_empty_patches(self):
        with pytest.raises(ValueError):
            train_network([], atoms_side=4)

    def test_too_few_patches(self):
        with pytest.raises(ValueError):
            train_network([np.zeros((4, 4))] * 3, atoms_side=4)

    def test_shapes_and_tag(self, hsd15_net):
        net = hsd15_net
        assert net.config_tag == "HSD-15"
        assert net.s1.atoms.shape == (225, 32 * 32)
        assert net.s1.grid.rows == net.s1.grid.cols == 15
        assert net.descriptor_dim == 64
        assert len(net.s1.grid.atom_assignment) == 225
        # every atom occupies a unique cell on the 15x15 grid
        assert len(set(net.s1.grid.atom_assignment.values())) == 225

    def test_reconstruction_rates_recorded(self, hsd15_net):
        assert 0.0 <= hsd15_net.s1_reconstruction <= 1.0
        assert 0.0 <= hsd15_net.s2_reconstruction <= 1.0
        assert hsd15_net.s1_reconstruction > 0.5

    def test_atom_rows_unit_norm(self, hsd15_net):
        for atoms in (hsd15_net.s1.atoms, hsd15_net.s2.atoms):
            assert np.allclose(np.linalg.norm(atoms, axis=1), 1.0, atol=1e-6)


class TestEncodeLandmark:
    def test_descriptor_properties(self, hsd15_net, train_patches):
        d = encode_landmark(hsd15_net, train_patches[0])
        assert d.shape == (64,)
        assert np.all(d >= 0.0)
        assert np.linalg.norm(d) == pytest.approx(1.0)

    def test_deterministic(self, hsd15_net, train_patches):
        a = encode_landmark(hsd15_net, train_patches[3])
        b = encode_landmark(hsd15_net, train_patches[3])
        assert np.array_equal(a, b)

    def test_wrong_patch_size(self, hsd15_net):
        with pytest.raises(ValueError):
            encode_landmark(hsd15_net, np.zeros((8, 8)))

    def test_distinct_patches_distinct_descriptors(self, hsd15_net, train_patches):
        a = encode_landmark(hsd15_net, train_patches[0])
        b = encode_landmark(hsd15_net, train_patches[50])
        assert cosine(a, b) < 0.999

    def test_scale_invariance_of_descriptor_direction(self, hsd15_net, train_patches):
        """Doubling patch contrast doubles all correlations but leaves the
        normalized descriptor's direction essentially unchanged."""
        p = train_patches[7]
        a = encode_landmark(hsd15_net, p)
        b = encode_landmark(hsd15_net, 2.0 * p)
        assert cosine(a, b) > 0.98


class TestS1RawDescriptor:
    def test_shape_and_norm(self, hsd15_net, train_patches):
        d = s1_raw_descriptor(hsd15_net, train_patches[0])
        assert d.shape == (225,)
        assert np.linalg.norm(d) == pytest.approx(1.0)

    def test_sparser_than_pooled_path(self, hsd15_net, train_patches):
        d = s1_raw_descriptor(hsd15_net, train_patches[0])
        assert np.count_nonzero(d) <= hsd15_net.s1.n0

"""S1/C1/S2/C2 stack: topological sparse layers alternated with max pooling.

A landmark patch is sparse-coded on the S1 dictionary, projected on the
S1 SOM grid, max-pooled (C1), then the flattened C1 map is sparse-coded
again on S2 and pooled (C2). The flattened, L2-normalized C2 map is the
landmark descriptor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .sparse import (
    SparseCode,
    SparseLearnConfig,
    TrainingLog,
    encode_mp,
    learn_dictionary,
    reconstruction_rate,
)
from .topology import SomConfig, SomGrid, assign_atoms, project_code, train_som


def max_pool(act: np.ndarray, pool: int) -> np.ndarray:
    """Non-overlapping pool x pool max, zero-padding right/bottom (ceil dims)."""
    if pool < 1:
        raise ValueError("pool must be >= 1")
    rows, cols = act.shape
    out_r = math.ceil(rows / pool)
    out_c = math.ceil(cols / pool)
    padded = np.zeros((out_r * pool, out_c * pool))
    padded[:rows, :cols] = act
    return padded.reshape(out_r, pool, out_c, pool).max(axis=(1, 3))


def descriptor_length(atoms_side: int, grid_side: int, pool: int = 2) -> int:
    """Final descriptor element count for a given grid side and pooling size."""
    return math.ceil(grid_side / pool) ** 2


def _l2_normalize(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    return v / n if n > 1e-12 else v


@dataclass
class TslLayer:
    """One topological sparse layer: dictionary atoms plus their SOM placement."""

    atoms: np.ndarray
    grid: SomGrid
    n0: int

    def project(self, signal: np.ndarray) -> np.ndarray:
        code = encode_mp(self.atoms, signal, self.n0)
        return project_code(self.grid, code.indices, code.coefficients)


@dataclass
class HsdNetwork:
    s1: TslLayer
    s2: TslLayer
    pool_size: int
    config_tag: str = ""
    s1_reconstruction: float = float("nan")
    s2_reconstruction: float = float("nan")

    @property
    def descriptor_dim(self) -> int:
        return math.ceil(self.s2.grid.rows / self.pool_size) * math.ceil(self.s2.grid.cols / self.pool_size)


def encode_landmark(net: HsdNetwork, patch: np.ndarray) -> np.ndarray:
    """Whitened patch -> fixed-length L2-normalized descriptor."""
    signal = patch.ravel().astype(np.float64)
    if signal.shape[0] != net.s1.atoms.shape[1]:
        raise ValueError(
            f"patch dim {signal.shape[0]} does not match S1 input dim {net.s1.atoms.shape[1]}"
        )
    c1 = max_pool(net.s1.project(signal), net.pool_size)
    s2_in = _l2_normalize(c1.ravel())
    c2 = max_pool(net.s2.project(s2_in), net.pool_size)
    return _l2_normalize(c2.ravel())


def s1_raw_descriptor(net: HsdNetwork, patch: np.ndarray) -> np.ndarray:
    """Flattened unpooled S1 projection, for pooling-ablation comparisons."""
    return _l2_normalize(net.s1.project(patch.ravel().astype(np.float64)).ravel())


def train_network(
    landmark_patches: list[np.ndarray],
    atoms_side: int,
    grid_side: int | None = None,
    s1_cfg: SparseLearnConfig | None = None,
    s2_cfg: SparseLearnConfig | None = None,
    som_cfg: SomConfig | None = None,
    pool_size: int = 2,
    config_tag: str = "",
) -> HsdNetwork:
    """Train S1 on patches, then S2 on the pooled S1 responses of those patches."""
    if not landmark_patches:
        raise ValueError("landmark patch set is empty")
    grid_side = grid_side if grid_side is not None else atoms_side
    s1_cfg = s1_cfg or SparseLearnConfig(n0=10)
    s2_cfg = s2_cfg or SparseLearnConfig(n0=5)
    som_cfg = som_cfg or SomConfig()
    m_atoms = atoms_side * atoms_side
    if len(landmark_patches) < m_atoms:
        raise ValueError(f"need at least {m_atoms} patches to learn {m_atoms} atoms")
    if not config_tag:
        config_tag = f"HSD-{atoms_side}" if grid_side == atoms_side else f"HSD-{atoms_side}/{grid_side}"

    signals = [p.ravel().astype(np.float64) for p in landmark_patches]
    s1_atoms, _, _ = learn_dictionary(signals, m_atoms, s1_cfg)
    s1_grid = assign_atoms(train_som(s1_atoms, grid_side, grid_side, som_cfg), s1_atoms)
    s1 = TslLayer(s1_atoms, s1_grid, s1_cfg.n0)

    c1_maps = [
        _l2_normalize(max_pool(s1.project(s), pool_size).ravel()) for s in signals
    ]
    m2 = min(m_atoms, len(c1_maps))
    s2_atoms, _, _ = learn_dictionary(c1_maps, m2, s2_cfg)
    som2 = SomConfig(som_cfg.alpha0, som_cfg.sigma0, som_cfg.iterations, som_cfg.seed + 1)
    s2_grid = assign_atoms(train_som(s2_atoms, grid_side, grid_side, som2), s2_atoms)
    s2 = TslLayer(s2_atoms, s2_grid, s2_cfg.n0)

    net = HsdNetwork(s1=s1, s2=s2, pool_size=pool_size, config_tag=config_tag)
    net.s1_reconstruction = _layer_reconstruction(s1, signals)
    net.s2_reconstruction = _layer_reconstruction(s2, c1_maps)
    return net


def _layer_reconstruction(layer: TslLayer, signals: list[np.ndarray]) -> float:
    codes = [encode_mp(layer.atoms, s, layer.n0) for s in signals]
    return reconstruction_rate(layer.atoms, codes, signals)

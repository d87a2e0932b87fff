"""Place memory: landmark identity merged with azimuth into Max-Pi patterns,
place cells recruited under a vigilance loop.

Each image yields a set of (descriptor, azimuth activity) observations.
Every observation deposits match-strength x azimuth-profile into the row
of its best-matching stored landmark signature; rows combine across the
image's landmarks with an element-wise max. Place cells store normalized
flattened patterns; recognition is cosine similarity, with recruitment
whenever the best cell falls below the vigilance threshold.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class VigilanceConfig:
    threshold: float = 0.92
    what_match_floor: float = 0.85

    def __post_init__(self):
        if not (0 < self.threshold < 1):
            raise ValueError("vigilance threshold must lie in (0, 1)")


def azimuth_activity(
    heading_deg: float,
    poi_x: float,
    img_width: int,
    hfov_deg: float = 90.0,
    sigma_bins: float = 2.0,
    a_bins: int = 180,
) -> np.ndarray:
    """Gaussian-spread one-hot over azimuth bins, peak normalized to 1.

    Absolute azimuth = vehicle heading plus the PoI's angular offset in
    the image; the Gaussian spread is circular.
    """
    if a_bins < 8:
        raise ValueError("a_bins must be >= 8")
    if hfov_deg <= 0:
        raise ValueError("hfov_deg must be positive")
    theta = heading_deg + hfov_deg * (poi_x / img_width - 0.5)
    peak = int(round(theta / 360.0 * a_bins)) % a_bins
    offsets = np.arange(a_bins) - peak
    offsets = (offsets + a_bins // 2) % a_bins - a_bins // 2
    act = np.exp(-0.5 * (offsets / sigma_bins) ** 2)
    return act / act.max()


@dataclass
class PlaceCell:
    weights: np.ndarray  # unit-normalized flattened Max-Pi pattern
    creation_index: int
    location: tuple[float, float]


@dataclass
class PlaceMemory:
    signatures: list[np.ndarray] = field(default_factory=list)
    cells: list[PlaceCell] = field(default_factory=list)
    a_bins: int = 180
    config: VigilanceConfig = field(default_factory=VigilanceConfig)

    # matmul caches for the two matching paths; rebuilt on growth
    _sig_matrix: np.ndarray | None = field(default=None, repr=False, compare=False)
    _cell_matrix: np.ndarray | None = field(default=None, repr=False, compare=False)
    _cell_matrix_dim: int = field(default=-1, repr=False, compare=False)

    def signature_matrix(self) -> np.ndarray:
        if self._sig_matrix is None or len(self._sig_matrix) != len(self.signatures):
            self._sig_matrix = np.array(self.signatures) if self.signatures else np.empty((0, 0))
        return self._sig_matrix

    def cell_matrix(self, dim: int) -> np.ndarray:
        """Stored cell weights zero-padded to `dim`, one row per cell."""
        if (
            self._cell_matrix is None
            or len(self._cell_matrix) != len(self.cells)
            or self._cell_matrix_dim != dim
        ):
            mat = np.zeros((len(self.cells), dim))
            for k, cell in enumerate(self.cells):
                if len(cell.weights) > dim:
                    raise ValueError("query pattern smaller than a stored cell pattern")
                mat[k, : len(cell.weights)] = cell.weights
            self._cell_matrix = mat
            self._cell_matrix_dim = dim
        return self._cell_matrix

    def state_hash(self) -> str:
        h = hashlib.sha256()
        for s in self.signatures:
            h.update(np.asarray(s, dtype=np.float64).tobytes())
        for c in self.cells:
            h.update(np.asarray(c.weights, dtype=np.float64).tobytes())
            h.update(str(c.creation_index).encode())
        return h.hexdigest()


def _cosine(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu < 1e-12 or nv < 1e-12:
        return 0.0
    return float(u @ v / (nu * nv))


def build_pattern(
    memory: PlaceMemory,
    observations: list[tuple[np.ndarray, np.ndarray]],
    learn: bool = True,
) -> np.ndarray:
    """Merge an image's observations into a Max-Pi pattern.

    For each (descriptor, azimuth) pair, the best stored signature is
    found by cosine similarity s; below the what-match floor (and with
    learning enabled) the descriptor is recruited as a new signature with
    s = 1. The pattern row of the matched signature takes the element-wise
    max with s * azimuth. With learning disabled the memory is untouched
    and the pattern keeps its current row count.
    """
    if not observations:
        raise ValueError("observations must be non-empty")
    deposits: list[tuple[int, float, np.ndarray]] = []
    for desc, azi in observations:
        if memory.signatures:
            sig_mat = memory.signature_matrix()
            norms = np.linalg.norm(sig_mat, axis=1) * max(np.linalg.norm(desc), 1e-12)
            sims = sig_mat @ desc / np.maximum(norms, 1e-12)
            l_star = int(np.argmax(sims))
            s = float(sims[l_star])
        else:
            l_star, s = -1, -1.0
        if s < memory.config.what_match_floor and learn:
            memory.signatures.append(np.asarray(desc, dtype=np.float64).copy())
            l_star, s = len(memory.signatures) - 1, 1.0
        if l_star >= 0:
            deposits.append((l_star, s, azi))
    pattern = np.zeros((len(memory.signatures), memory.a_bins))
    for l_star, s, azi in deposits:
        pattern[l_star] = np.maximum(pattern[l_star], s * azi)
    return pattern


def place_cell_activities(cells: list[PlaceCell], pattern: np.ndarray) -> np.ndarray:
    """Cosine of the flattened pattern against each cell, zero-padding old cells."""
    flat = pattern.ravel()
    if not cells:
        return np.zeros(0)
    q = np.linalg.norm(flat)
    if q < 1e-12:
        return np.zeros(len(cells))
    mat = np.zeros((len(cells), len(flat)))
    for k, cell in enumerate(cells):
        if len(cell.weights) > len(flat):
            raise ValueError("query pattern smaller than a stored cell pattern")
        mat[k, : len(cell.weights)] = cell.weights
    norms = np.linalg.norm(mat, axis=1)
    return mat @ flat / (np.maximum(norms, 1e-12) * q)


def vigilance_step(
    memory: PlaceMemory,
    pattern: np.ndarray,
    frame_index: int,
    location: tuple[float, float],
) -> tuple[int, bool, np.ndarray]:
    """Recognize or recruit: returns (cell index, newly_created, activities)."""
    activities = _activities_cached(memory, pattern)
    if len(activities) and float(activities.max()) >= memory.config.threshold:
        return int(np.argmax(activities)), False, activities
    flat = pattern.ravel()
    n = np.linalg.norm(flat)
    weights = flat / n if n > 1e-12 else flat.copy()
    memory.cells.append(PlaceCell(weights=weights, creation_index=frame_index, location=location))
    return len(memory.cells) - 1, True, activities


def _activities_cached(memory: PlaceMemory, pattern: np.ndarray) -> np.ndarray:
    flat = pattern.ravel()
    q = np.linalg.norm(flat)
    if not memory.cells or q < 1e-12:
        return np.zeros(len(memory.cells))
    mat = memory.cell_matrix(len(flat))
    norms = np.linalg.norm(mat, axis=1)
    return mat @ flat / (np.maximum(norms, 1e-12) * q)


def localize(memory: PlaceMemory, pattern: np.ndarray) -> tuple[int, float]:
    """Best-matching place cell and its activity; never mutates the memory."""
    if not memory.cells:
        raise ValueError("memory empty")
    activities = _activities_cached(memory, pattern)
    best = int(np.argmax(activities))
    return best, float(activities[best])

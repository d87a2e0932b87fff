"""Kohonen self-organizing map used to lay dictionary atoms out on a 2-D grid.

After SOM training on the atoms themselves, each atom is assigned to a
unique grid cell (greedy bipartite matching), so that neighbouring cells
encode similar features and max pooling over the grid is meaningful.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SomConfig:
    alpha0: float = 0.5
    sigma0: float = 4.0
    iterations: int = 5000
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.alpha0 <= 1):
            raise ValueError("alpha0 must lie in (0, 1]")
        if self.sigma0 < 0.5:
            raise ValueError("sigma0 must be >= 0.5")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")


@dataclass
class SomGrid:
    rows: int
    cols: int
    weights: np.ndarray  # (rows*cols, dim), cell (r, c) at index r*cols + c
    atom_assignment: dict[int, tuple[int, int]] = field(default_factory=dict)

    def cell_weight(self, row: int, col: int) -> np.ndarray:
        return self.weights[row * self.cols + col]


def som_winner(grid: SomGrid, x: np.ndarray) -> tuple[int, int]:
    """Best matching cell: minimal Euclidean distance, lexicographic tie-break."""
    d = np.linalg.norm(grid.weights - x, axis=1)
    idx = int(np.argmin(d))  # argmin takes the first minimum = lowest (row, col)
    return divmod(idx, grid.cols)


def _grid_coords(rows: int, cols: int) -> np.ndarray:
    rr, cc = np.mgrid[0:rows, 0:cols]
    return np.stack([rr.ravel(), cc.ravel()], axis=1).astype(np.float64)


def som_update(grid: SomGrid, x: np.ndarray, winner: tuple[int, int], alpha_t: float, sigma_t: float) -> SomGrid:
    """Move every cell toward x, Gaussian-weighted by grid distance to the winner."""
    if not (0 < alpha_t <= 1):
        raise ValueError("alpha_t must lie in (0, 1]")
    if sigma_t <= 0:
        raise ValueError("sigma_t must be positive")
    coords = _grid_coords(grid.rows, grid.cols)
    d2 = np.sum((coords - np.array(winner, dtype=np.float64)) ** 2, axis=1)
    h = np.exp(-0.5 * d2 / sigma_t**2)
    weights = grid.weights + alpha_t * h[:, None] * (x - grid.weights)
    return SomGrid(grid.rows, grid.cols, weights, dict(grid.atom_assignment))


def train_som(samples: np.ndarray, rows: int, cols: int, cfg: SomConfig) -> SomGrid:
    """Classic online SOM with linearly decaying rate and neighbourhood radius."""
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    if len(samples) == 0:
        raise ValueError("samples must be non-empty")
    rng = np.random.default_rng(cfg.seed)
    n_cells = rows * cols
    init_idx = rng.integers(0, len(samples), size=n_cells)
    weights = samples[init_idx].copy()
    coords = _grid_coords(rows, cols)
    T = cfg.iterations
    for t in range(1, T + 1):
        x = samples[rng.integers(0, len(samples))]
        alpha_t = max(1e-4, cfg.alpha0 * (1.0 - t / (T + 1)))
        sigma_t = max(0.5, cfg.sigma0 * (1.0 - t / (T + 1)))
        winner = np.argmin(np.einsum("ij,ij->i", weights - x, weights - x))
        d2 = np.sum((coords - coords[winner]) ** 2, axis=1)
        h = np.exp(-0.5 * d2 / sigma_t**2)
        weights += alpha_t * h[:, None] * (x - weights)
    return SomGrid(rows, cols, weights)


def assign_atoms(grid: SomGrid, atoms: np.ndarray) -> SomGrid:
    """Greedy bipartite assignment of atoms to unique grid cells.

    Repeatedly commits the globally smallest atom-cell distance among
    still-unassigned atoms and unoccupied cells.
    """
    m = len(atoms)
    n_cells = grid.rows * grid.cols
    if n_cells < m:
        raise ValueError(f"grid has {n_cells} cells for {m} atoms")
    dist = np.linalg.norm(atoms[:, None, :] - grid.weights[None, :, :], axis=2)
    assignment: dict[int, tuple[int, int]] = {}
    free_atoms = np.ones(m, dtype=bool)
    free_cells = np.ones(n_cells, dtype=bool)
    work = dist.copy()
    for _ in range(m):
        masked = np.where(free_atoms[:, None] & free_cells[None, :], work, np.inf)
        a, c = np.unravel_index(np.argmin(masked), masked.shape)
        assignment[int(a)] = divmod(int(c), grid.cols)
        free_atoms[a] = False
        free_cells[c] = False
    return SomGrid(grid.rows, grid.cols, grid.weights.copy(), assignment)


def project_code(grid: SomGrid, indices: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    """Deposit |coefficient| of each active atom at its assigned cell."""
    act = np.zeros((grid.rows, grid.cols))
    for i, a in zip(indices, coefficients):
        r, c = grid.atom_assignment[int(i)]
        act[r, c] += abs(float(a))
    return act

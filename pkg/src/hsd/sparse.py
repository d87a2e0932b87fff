"""Homeostatic sparse Hebbian learning.

A dictionary is an (M, N) array of unit-norm atoms (one atom per row).
Encoding uses greedy matching pursuit; an optional homeostasis stage
rescales correlation magnitudes through per-atom empirical CDFs so that
atom usage equalizes during learning (a histogram-equalization effect).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

HOMEO_BINS = 128
RESIDUAL_EPS = 1e-9


@dataclass(frozen=True)
class SparseCode:
    """Sparse activity vector: parallel arrays of atom indices and coefficients."""

    indices: np.ndarray
    coefficients: np.ndarray

    @property
    def nnz(self) -> int:
        return len(self.indices)

    def dense(self, m_atoms: int) -> np.ndarray:
        a = np.zeros(m_atoms)
        np.add.at(a, self.indices, self.coefficients)
        return a


EMPTY_CODE = SparseCode(np.empty(0, dtype=int), np.empty(0))


@dataclass
class HomeostasisState:
    """Per-atom empirical CDFs of |correlation| on a shared [0, c_max] grid."""

    cdf: np.ndarray  # (M, HOMEO_BINS), non-decreasing rows ending at 1
    c_max: float
    eta_h: float

    @classmethod
    def initial(cls, m_atoms: int, eta_h: float = 0.01) -> "HomeostasisState":
        ramp = np.linspace(0.0, 1.0, HOMEO_BINS)
        return cls(cdf=np.tile(ramp, (m_atoms, 1)), c_max=1e-6, eta_h=eta_h)

    def bin_positions(self) -> np.ndarray:
        return np.linspace(0.0, self.c_max, HOMEO_BINS)

    def z(self, magnitudes: np.ndarray) -> np.ndarray:
        """Evaluate each atom's CDF at its own |correlation| (linear interpolation)."""
        step = self.c_max / (HOMEO_BINS - 1)
        t = np.clip(magnitudes / step, 0.0, HOMEO_BINS - 1)
        lo = np.minimum(t.astype(int), HOMEO_BINS - 2)
        frac = t - lo
        rows = np.arange(len(magnitudes))
        return (1.0 - frac) * self.cdf[rows, lo] + frac * self.cdf[rows, lo + 1]


@dataclass(frozen=True)
class SparseLearnConfig:
    n0: int = 10
    eta: float = 0.05
    eta_h: float = 0.01
    lambda_bits: float = 1.0
    sigma_n: float = 1.0
    epochs: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.n0 < 1:
            raise ValueError("n0 must be >= 1")
        if not (0 < self.eta < 1) or not (0 < self.eta_h < 1):
            raise ValueError("eta and eta_h must lie in (0, 1)")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


def normalize_rows(atoms: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(atoms, axis=1, keepdims=True)
    norms[norms < 1e-12] = 1.0
    return atoms / norms


def encode_mp(
    atoms: np.ndarray,
    signal: np.ndarray,
    n0: int,
    homeo: HomeostasisState | None = None,
) -> SparseCode:
    """Greedy matching pursuit.

    At each step the residual is correlated with every atom; the winner is
    the largest |correlation| (or the largest homeostatic z of it when
    `homeo` is given), its correlation is added to the accumulated
    coefficient and subtracted from the residual. Stops after n0
    selections or once the residual norm falls below 1e-9.
    """
    if n0 < 1:
        raise ValueError("n0 must be >= 1")
    if signal.shape != (atoms.shape[1],):
        raise ValueError(f"signal length {signal.shape} does not match atom dim {atoms.shape[1]}")
    residual = signal.astype(np.float64, copy=True)
    coeffs: dict[int, float] = {}
    for _ in range(n0):
        if np.linalg.norm(residual) < RESIDUAL_EPS:
            break
        corr = atoms @ residual
        mags = np.abs(corr)
        score = homeo.z(mags) if homeo is not None else mags
        i_star = int(np.argmax(score))
        c = corr[i_star]
        coeffs[i_star] = coeffs.get(i_star, 0.0) + c
        residual -= c * atoms[i_star]
    if not coeffs:
        return EMPTY_CODE
    idx = np.array(sorted(coeffs), dtype=int)
    return SparseCode(idx, np.array([coeffs[i] for i in idx]))


def reconstruct(atoms: np.ndarray, code: SparseCode) -> np.ndarray:
    if code.nnz == 0:
        return np.zeros(atoms.shape[1])
    return code.coefficients @ atoms[code.indices]


def cost(
    atoms: np.ndarray,
    code: SparseCode,
    signal: np.ndarray,
    lambda_bits: float = 1.0,
    sigma_n: float = 1.0,
) -> float:
    """Reconstruction energy over 2*sigma_n^2 plus lambda times the L0 norm."""
    err = signal - reconstruct(atoms, code)
    return float(err @ err / (2.0 * sigma_n**2) + lambda_bits * code.nnz)


def hebbian_update(atoms: np.ndarray, code: SparseCode, signal: np.ndarray, eta: float) -> np.ndarray:
    """Pull active atoms toward the residual, then renormalize them."""
    if code.nnz == 0:
        return atoms.copy()
    out = atoms.copy()
    err = signal - reconstruct(atoms, code)
    for i, a_i in zip(code.indices, code.coefficients):
        out[i] = out[i] + eta * a_i * err
    out[code.indices] = normalize_rows(out[code.indices])
    return out


def homeostasis_update(homeo: HomeostasisState, all_correlations: np.ndarray) -> HomeostasisState:
    """Blend each atom's CDF toward the step indicator at its observed |correlation|.

    A growing running maximum widens the shared bin domain; old CDFs are
    re-interpolated onto the new grid.
    """
    mags = np.abs(all_correlations)
    c_max = max(homeo.c_max, float(mags.max())) if len(mags) else homeo.c_max
    pos_new = np.linspace(0.0, c_max, HOMEO_BINS)
    cdf = homeo.cdf
    if c_max > homeo.c_max:
        # same target grid for every row: shared interpolation weights
        step_old = homeo.c_max / (HOMEO_BINS - 1)
        t = np.clip(pos_new / step_old, 0.0, HOMEO_BINS - 1)
        lo = np.minimum(t.astype(int), HOMEO_BINS - 2)
        frac = t - lo
        cdf = (1.0 - frac) * cdf[:, lo] + frac * cdf[:, lo + 1]
    indicator = (pos_new[None, :] >= mags[:, None]).astype(np.float64)
    cdf = (1.0 - homeo.eta_h) * cdf + homeo.eta_h * indicator
    return HomeostasisState(cdf=cdf, c_max=c_max, eta_h=homeo.eta_h)


def _distinct_init(data: np.ndarray, m_atoms: int, rng: np.random.Generator) -> np.ndarray:
    """Pick m_atoms starting atoms, preferring distinct patch values."""
    order = rng.permutation(len(data))
    picked: list[int] = []
    seen: set[bytes] = set()
    for j in order:
        key = data[j].tobytes()
        if key not in seen:
            seen.add(key)
            picked.append(j)
            if len(picked) == m_atoms:
                break
    k = 0
    while len(picked) < m_atoms:  # duplicate values unavoidable
        picked.append(order[k % len(order)])
        k += 1
    return data[picked].copy()


@dataclass
class TrainingLog:
    mean_cost_per_epoch: list[float] = field(default_factory=list)


def learn_dictionary(
    patches: list[np.ndarray],
    m_atoms: int,
    cfg: SparseLearnConfig,
) -> tuple[np.ndarray, HomeostasisState, TrainingLog]:
    """Alternate homeostatic encoding and Hebbian updates over shuffled patches.

    Atoms start as m_atoms distinct training patches (unit-normalized).
    """
    if len(patches) < m_atoms:
        raise ValueError(f"need at least {m_atoms} patches, got {len(patches)}")
    data = np.array([p.ravel() for p in patches], dtype=np.float64)
    rng = np.random.default_rng(cfg.seed)
    atoms = normalize_rows(_distinct_init(data, m_atoms, rng))
    homeo = HomeostasisState.initial(m_atoms, cfg.eta_h)
    log = TrainingLog()
    for _ in range(cfg.epochs):
        order = rng.permutation(len(data))
        epoch_cost = 0.0
        for j in order:
            s = data[j]
            code = encode_mp(atoms, s, cfg.n0, homeo=homeo)
            epoch_cost += cost(atoms, code, s, cfg.lambda_bits, cfg.sigma_n)
            atoms = hebbian_update(atoms, code, s, cfg.eta)
            homeo = homeostasis_update(homeo, atoms @ s)
        log.mean_cost_per_epoch.append(epoch_cost / len(data))
    return atoms, homeo, log


def reconstruction_rate(atoms: np.ndarray, codes: list[SparseCode], signals: list[np.ndarray]) -> float:
    """1 - sum of residual energies over total signal energy, clamped to [0, 1]."""
    err_sum = 0.0
    sig_sum = 0.0
    for code, s in zip(codes, signals):
        r = s - reconstruct(atoms, code)
        err_sum += float(r @ r)
        sig_sum += float(s @ s)
    if sig_sum < 1e-12:
        return 0.0
    return float(np.clip(1.0 - err_sum / sig_sum, 0.0, 1.0))

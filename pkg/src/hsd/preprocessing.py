"""Image loading, saliency-based point-of-interest detection and patch whitening.

Images are plain 2-D float64 numpy arrays with luminance in [0, 1]
(row-major, shape (height, width)). Patches are square float64 arrays,
zero-mean after whitening.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy.ndimage import correlate1d


@dataclass(frozen=True)
class PointOfInterest:
    x: int
    y: int
    saliency: float


def resize_bilinear(img: np.ndarray, target_width: int, target_height: int) -> np.ndarray:
    """Bilinear resize with half-pixel-centre sampling and edge clamping."""
    if target_width <= 0 or target_height <= 0:
        raise ValueError("target dimensions must be positive")
    h, w = img.shape
    if (h, w) == (target_height, target_width):
        return img.astype(np.float64, copy=True)
    sx = w / target_width
    sy = h / target_height
    xs = (np.arange(target_width) + 0.5) * sx - 0.5
    ys = (np.arange(target_height) + 0.5) * sy - 0.5
    x0 = np.clip(np.floor(xs), 0, w - 1).astype(int)
    y0 = np.clip(np.floor(ys), 0, h - 1).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = np.clip(xs - x0, 0.0, 1.0)
    fy = np.clip(ys - y0, 0.0, 1.0)
    top = img[np.ix_(y0, x0)] * (1 - fx) + img[np.ix_(y0, x1)] * fx
    bot = img[np.ix_(y1, x0)] * (1 - fx) + img[np.ix_(y1, x1)] * fx
    return top * (1 - fy[:, None]) + bot * fy[:, None]


def load_gray(path, target_width: int, target_height: int) -> np.ndarray:
    """Load a raster image as grayscale in [0,1], resized to the target size."""
    if target_width <= 0 or target_height <= 0:
        raise ValueError("target dimensions must be positive")
    try:
        with Image.open(path) as im:
            arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
    except (OSError, ValueError) as exc:
        raise IOError(f"cannot read image {path!r}: {exc}") from exc
    return resize_bilinear(arr, target_width, target_height)


def _gaussian_kernel1d(sigma: float) -> np.ndarray:
    radius = max(1, int(np.ceil(3.0 * sigma)))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with edge replication."""
    k = _gaussian_kernel1d(sigma)
    out = correlate1d(img, k, axis=1, mode="nearest")
    return correlate1d(out, k, axis=0, mode="nearest")


def edge_magnitude(img: np.ndarray) -> np.ndarray:
    """Sobel gradient magnitude (edge-energy stage feeding the DoG)."""
    padded = np.pad(img, 1, mode="edge")
    gx = (
        padded[:-2, 2:] + 2 * padded[1:-1, 2:] + padded[2:, 2:]
        - padded[:-2, :-2] - 2 * padded[1:-1, :-2] - padded[2:, :-2]
    )
    gy = (
        padded[2:, :-2] + 2 * padded[2:, 1:-1] + padded[2:, 2:]
        - padded[:-2, :-2] - 2 * padded[:-2, 1:-1] - padded[:-2, 2:]
    )
    return np.hypot(gx, gy)


def saliency_dog_response(img: np.ndarray, dog_sigma_small: float, dog_sigma_large: float) -> np.ndarray:
    """Unnormalized |DoG| of the edge-magnitude map; brightness-shift invariant."""
    if not (0 < dog_sigma_small < dog_sigma_large):
        raise ValueError("require 0 < dog_sigma_small < dog_sigma_large")
    edges = edge_magnitude(img)
    return np.abs(gaussian_blur(edges, dog_sigma_small) - gaussian_blur(edges, dog_sigma_large))


def saliency_map(img: np.ndarray, dog_sigma_small: float = 1.0, dog_sigma_large: float = 2.0) -> np.ndarray:
    """Min-max normalized saliency with a zeroed border of width 3*sigma_large."""
    resp = saliency_dog_response(img, dog_sigma_small, dog_sigma_large)
    border = int(np.ceil(3.0 * dog_sigma_large))
    h, w = resp.shape
    mask = np.zeros_like(resp)
    if h > 2 * border and w > 2 * border:
        mask[border:h - border, border:w - border] = resp[border:h - border, border:w - border]
    lo, hi = mask.min(), mask.max()
    if hi - lo < 1e-12:
        return np.zeros_like(resp)
    return (mask - lo) / (hi - lo)


def detect_pois(sal: np.ndarray, max_pois: int, min_separation: float) -> list[PointOfInterest]:
    """Greedy non-maximum suppression on a saliency map.

    Repeatedly takes the global maximum and zeroes a disc of radius
    min_separation around it, until max_pois points are found or the
    remaining maximum drops below 1e-4. Sorted by descending saliency.
    """
    if max_pois < 1:
        raise ValueError("max_pois must be >= 1")
    work = sal.copy()
    h, w = work.shape
    yy, xx = np.mgrid[0:h, 0:w]
    pois: list[PointOfInterest] = []
    for _ in range(max_pois):
        idx = np.argmax(work)
        y, x = np.unravel_index(idx, work.shape)
        v = work[y, x]
        if v < 1e-4:
            break
        pois.append(PointOfInterest(x=int(x), y=int(y), saliency=float(v)))
        work[(yy - y) ** 2 + (xx - x) ** 2 <= min_separation**2] = 0.0
    return pois


def whitening_gain(side: int) -> np.ndarray:
    """Frequency-domain whitening gain f * exp(-(f/f0)^4), f0 = 0.8 * Nyquist."""
    f1 = np.fft.fftfreq(side)
    fx, fy = np.meshgrid(f1, f1)
    f = np.hypot(fx, fy)
    f0 = 0.8 * 0.5
    return f * np.exp(-((f / f0) ** 4))


def whiten(raw: np.ndarray) -> np.ndarray:
    """Whiten a square patch: subtract mean, apply the radial frequency filter."""
    side = raw.shape[0]
    if side < 4 or raw.shape[0] != raw.shape[1]:
        raise ValueError("patch must be square with side >= 4")
    centered = raw - raw.mean()
    spec = np.fft.fft2(centered) * whitening_gain(side)
    out = np.real(np.fft.ifft2(spec))
    return out - out.mean()


def extract_patch(img: np.ndarray, poi: PointOfInterest, side: int) -> np.ndarray:
    """Whitened square crop centered on a point of interest."""
    h, w = img.shape
    half = side // 2
    y0, x0 = poi.y - half, poi.x - half
    if y0 < 0 or x0 < 0 or y0 + side > h or x0 + side > w:
        raise ValueError(f"patch window at ({poi.x},{poi.y}) side {side} exceeds image bounds")
    return whiten(img[y0:y0 + side, x0:x0 + side])


def extract_landmarks(
    img: np.ndarray,
    patch_side: int = 32,
    max_pois: int = 20,
    nms_radius: float = 16.0,
    dog_sigma_small: float = 1.0,
    dog_sigma_large: float = 2.0,
) -> list[tuple[PointOfInterest, np.ndarray]]:
    """Full detector path: saliency, NMS, patch extraction.

    PoIs whose patch window would leave the image are dropped.
    """
    sal = saliency_map(img, dog_sigma_small, dog_sigma_large)
    h, w = img.shape
    half = patch_side // 2
    out = []
    for poi in detect_pois(sal, max_pois, nms_radius):
        if half <= poi.x <= w - (patch_side - half) and half <= poi.y <= h - (patch_side - half):
            out.append((poi, extract_patch(img, poi, patch_side)))
    return out

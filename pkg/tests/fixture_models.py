"""Deterministic stand-in feature extractors for the desk-scale replication.

Five "models" of graded capability replace pretrained networks in CI,
spanning orientation-blind to orientation-sensitive representations:

  pool8 / pool16 / pyramid   block-averaged pixel features (no access
                             to local orientation, so phosphenes and
                             segments look alike to them)
  orient_tensor              blurred gradient orientation tensor
                             (mass, cos 2a, sin 2a) pooled to 6x6
  orient_hist                native-resolution gradient-orientation
                             histograms (4 bins x 6x6 cells)

Both orientation models carry a small coarse-pixel block for
position information. All are pure numpy functions of the stimulus
PNG, so fixture activations are reproducible without the activation
adapter or any model weights.
"""

import numpy as np
from scipy.ndimage import gaussian_filter

from contour_bench.images import read_gray_png


def block_mean(image: np.ndarray, n: int) -> np.ndarray:
    h, w = image.shape
    hh, ww = (h // n) * n, (w // n) * n
    return image[:hh, :ww].reshape(n, hh // n, n, ww // n).mean(axis=(1, 3))


def _pyramid(gray: np.ndarray) -> np.ndarray:
    return np.concatenate([block_mean(gray, n).ravel() for n in (4, 8, 16)])


def _orientation_tensor(gray: np.ndarray, cells: int = 6,
                        blur: float = 3.0) -> np.ndarray:
    gy, gx = np.gradient(gray)
    magnitude = np.hypot(gx, gy)
    angle = np.arctan2(gy, gx)
    fields = (
        gaussian_filter(magnitude, blur),
        gaussian_filter(magnitude * np.cos(2 * angle), blur),
        gaussian_filter(magnitude * np.sin(2 * angle), blur),
    )
    out = np.concatenate([block_mean(f, cells).ravel() for f in fields])
    norm = np.linalg.norm(out)
    return out / norm if norm > 0 else out


def _orientation_histogram(gray: np.ndarray, bins: int = 4,
                           cells: int = 6) -> np.ndarray:
    gy, gx = np.gradient(gray)
    magnitude = np.hypot(gx, gy)
    angle = np.arctan2(gy, gx) % np.pi
    bin_index = np.minimum((angle / np.pi * bins).astype(int), bins - 1)
    cell = gray.shape[0] // cells
    hist = np.zeros((cells, cells, bins))
    for r in range(cells):
        for c in range(cells):
            sl = (slice(r * cell, (r + 1) * cell),
                  slice(c * cell, (c + 1) * cell))
            hist[r, c] = np.bincount(bin_index[sl].ravel(),
                                     weights=magnitude[sl].ravel(),
                                     minlength=bins)
    flat = hist.ravel()
    norm = np.linalg.norm(flat)
    return flat / norm if norm > 0 else flat


FIXTURE_MODELS = {
    "pool8": lambda g: block_mean(g, 8).ravel(),
    "pool16": lambda g: block_mean(g, 16).ravel(),
    "pyramid": _pyramid,
    "orient_tensor": lambda g: np.concatenate(
        [_orientation_tensor(g), block_mean(g, 4).ravel()]),
    "orient_hist": lambda g: np.concatenate(
        [_orientation_histogram(g), block_mean(g, 4).ravel()]),
}


def extract_features(png_path, model: str) -> np.ndarray:
    gray = read_gray_png(png_path)
    return FIXTURE_MODELS[model](gray).astype(np.float32)

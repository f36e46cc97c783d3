"""Grayscale raster handling and PNG round-trips.

A grayscale image is a 2D float64 array with values in [0, 1]
(row-major, image[row, col]). PNG IO supports 8-bit and 16-bit
grayscale; internal processing always happens on normalized floats.
"""

from __future__ import annotations

import numpy as np
from PIL import Image

# Rec.709 luminance weights for RGB -> gray conversion.
LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])


def validate_gray(image: np.ndarray) -> np.ndarray:
    """Check the grayscale image contract and return the array as float64.

    Raises ValueError on wrong dimensionality, non-finite values, or
    values outside [0, 1].
    """
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2D grayscale array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("grayscale image contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("grayscale values must lie in [0, 1]")
    return arr


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Luminance conversion of an (H, W, 3) float array in [0, 1]."""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim != 3 or rgb.shape[2] < 3:
        raise ValueError(f"expected an (H, W, 3) array, got shape {rgb.shape}")
    return rgb[..., :3] @ LUMA_WEIGHTS


def read_gray_png(path) -> np.ndarray:
    """Load an 8- or 16-bit grayscale PNG as floats in [0, 1].

    Color inputs are converted via the standard luminance weights.
    """
    with Image.open(path) as im:
        if im.mode == "I;16":
            arr = np.asarray(im, dtype=np.float64) / 65535.0
        elif im.mode in ("L", "P", "1"):
            arr = np.asarray(im.convert("L"), dtype=np.float64) / 255.0
        else:
            rgb = np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0
            arr = rgb_to_gray(rgb)
    return np.clip(arr, 0.0, 1.0)


def write_gray_png(path, image: np.ndarray, bit_depth: int = 8) -> None:
    """Write a [0, 1] grayscale array as an 8- or 16-bit PNG."""
    arr = validate_gray(image)
    if bit_depth == 8:
        data = np.round(arr * 255.0).astype(np.uint8)
        Image.fromarray(data, mode="L").save(path, format="PNG")
    elif bit_depth == 16:
        data = np.round(arr * 65535.0).astype(np.uint16)
        Image.fromarray(data).save(path, format="PNG")  # uint16 -> I;16
    else:
        raise ValueError(f"bit_depth must be 8 or 16, got {bit_depth}")


def write_rgb_png(path, image: np.ndarray) -> None:
    """Write an (H, W, 3) float array in [0, 1] as an 8-bit RGB PNG."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) array, got shape {arr.shape}")
    data = np.round(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(path, format="PNG")

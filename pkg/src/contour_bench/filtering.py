"""Quadrature Gabor filtering, orientation extraction, and contour binarization.

The filter pair is

    G_theta(x, y, phi) = exp(-(x^2+y^2)/(2 sigma^2))
                         * (cos(2 pi (x cos phi + y sin phi)/lambda - theta)
                            - c0 cos theta)

with the DC-cancelling constant c0 = exp(-2 (pi sigma / lambda)^2). The
even (theta=0) and odd (theta=pi/2) responses are combined into the
phase-invariant energy

    C(x, y, phi) = sqrt((G_0 * I)^2 + (G_pi/2 * I)^2).

Orientation convention: `phi` in the kernel formula is the carrier-wave
direction, which is perpendicular to the contours the filter responds
to. Energy channels returned by `contour_energy` are labeled by
*contour* orientation (the local tangent), so the channel for angle a
is computed with carrier direction a + pi/2. This makes C(x, y, a) the
strength of contours oriented at a, and placed segments align with the
local tangent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import fft as sp_fft

from .images import validate_gray

# Fraction of the image-wide max strength below which the dominant
# orientation is considered undefined.
DEFAULT_VALIDITY_FLOOR_FRACTION = 0.05

# Default truncation radius, in units of sigma. 3 sigma leaves ~5e-4
# relative DC leakage in the even kernel, which violates the 1e-6
# cancellation tolerance; 5 sigma leaves ~4e-8.
KERNEL_RADIUS_SIGMA = 5.0


@dataclass(frozen=True)
class GaborParams:
    """Geometry of the quadrature filter pair.

    sigma and lam are in degrees of visual angle and get converted to
    pixels via pixels_per_degree. kernel_radius is the truncation
    half-width in pixels; it defaults to 5 sigma and must be at least
    ceil(3 sigma) in pixels.
    """

    sigma: float = 0.06
    lam: float = 0.12
    pixels_per_degree: float = 32.0
    kernel_radius: int = 0  # 0 -> derive from sigma

    def __post_init__(self):
        if self.sigma <= 0 or self.lam <= 0 or self.pixels_per_degree <= 0:
            raise ValueError("sigma, lam and pixels_per_degree must be positive")
        if self.kernel_radius == 0:
            object.__setattr__(
                self, "kernel_radius",
                int(math.ceil(KERNEL_RADIUS_SIGMA * self.sigma_px)),
            )
        min_radius = int(math.ceil(3.0 * self.sigma_px))
        if self.kernel_radius < min_radius:
            raise ValueError(
                f"kernel_radius {self.kernel_radius} below minimum {min_radius} (3 sigma)"
            )

    @property
    def sigma_px(self) -> float:
        return self.sigma * self.pixels_per_degree

    @property
    def lambda_px(self) -> float:
        return self.lam * self.pixels_per_degree


@dataclass(frozen=True)
class OrientationBank:
    """Evenly spaced contour orientations on [0, pi)."""

    angles: tuple = ()

    def __post_init__(self):
        angles = tuple(float(a) for a in self.angles)
        if len(angles) < 2:
            raise ValueError("orientation bank needs at least 2 angles")
        diffs = np.diff(angles)
        if np.any(diffs <= 0):
            raise ValueError("orientation bank angles must be strictly increasing")
        if not np.allclose(diffs, diffs[0], rtol=0, atol=1e-12):
            raise ValueError("orientation bank spacing must be uniform")
        if angles[0] < 0 or angles[-1] >= np.pi:
            raise ValueError("orientation bank angles must lie in [0, pi)")
        object.__setattr__(self, "angles", angles)

    @classmethod
    def evenly_spaced(cls, count: int = 8) -> "OrientationBank":
        return cls(tuple(k * np.pi / count for k in range(count)))

    @property
    def step(self) -> float:
        return self.angles[1] - self.angles[0]

    def __len__(self):
        return len(self.angles)


@dataclass
class ContourMap:
    """Per-orientation contour energy plus the dominant-orientation field.

    energy has shape (n_orientations, H, W) and is aligned with
    `angles` (contour orientations). strength is the max over
    orientations, orientation the argmax angle (ties to the smallest
    angle), and valid_mask flags pixels whose strength exceeds the
    validity floor.
    """

    angles: tuple
    energy: np.ndarray
    strength: np.ndarray = field(default=None)
    orientation: np.ndarray = field(default=None)
    valid_mask: np.ndarray = field(default=None)

    @property
    def shape(self):
        return self.energy.shape[1:]


@dataclass
class BinaryImage:
    mask: np.ndarray
    threshold: float = 0.0
    degenerate: bool = False  # constant input, no mass separable

    @property
    def shape(self):
        return self.mask.shape


def dc_constant(params: GaborParams) -> float:
    """DC-cancellation constant c0 = exp(-2 (pi sigma / lambda)^2)."""
    return float(np.exp(-2.0 * (np.pi * params.sigma / params.lam) ** 2))


def make_gabor_kernel(params: GaborParams, theta: float, phi: float) -> np.ndarray:
    """Sample the Gabor kernel on a (2R+1)^2 pixel grid.

    theta selects the quadrature phase (0 = even, pi/2 = odd); phi is
    the carrier-wave direction in radians. sigma/lambda are converted
    to pixels, and the grid is sampled at pixel centers around (0, 0).
    """
    radius = params.kernel_radius
    if radius < 1:
        raise ValueError("kernel too small")
    sigma_px = params.sigma_px
    lambda_px = params.lambda_px
    c0 = dc_constant(params)
    coords = np.arange(-radius, radius + 1, dtype=np.float64)
    x, y = np.meshgrid(coords, coords)  # x along columns, y along rows
    envelope = np.exp(-(x * x + y * y) / (2.0 * sigma_px * sigma_px))
    carrier = np.cos(
        2.0 * np.pi * (x * np.cos(phi) + y * np.sin(phi)) / lambda_px - theta
    )
    return envelope * (carrier - c0 * np.cos(theta))


@lru_cache(maxsize=8)
def _bank_kernel_ffts(params: GaborParams, angles: tuple, fft_shape: tuple):
    """Frequency-domain quadrature kernels for every bank orientation.

    Channel i holds the (even, odd) kernel pair for contour orientation
    angles[i]; the carrier runs perpendicular to the contour.
    """
    pairs = []
    for angle in angles:
        wave = (angle + np.pi / 2.0) % np.pi
        even = make_gabor_kernel(params, 0.0, wave)
        odd = make_gabor_kernel(params, np.pi / 2.0, wave)
        pairs.append((sp_fft.rfft2(even, fft_shape), sp_fft.rfft2(odd, fft_shape)))
    return pairs


def contour_energy(image: np.ndarray, params: GaborParams,
                   bank: OrientationBank) -> ContourMap:
    """Quadrature orientation-energy maps of a grayscale image.

    The image border is extended by edge replication before the
    zero-padded FFT convolution so that constant regions stay
    DC-cancelled all the way to the image edge; the result is cropped
    back to the input size. Strength, orientation and the default
    validity mask (5% of max strength) are populated.
    """
    image = validate_gray(image)
    h, w = image.shape
    radius = params.kernel_radius
    side = 2 * radius + 1
    if h < side or w < side:
        raise ValueError("image too small for filter")

    padded = np.pad(image, radius, mode="edge")
    fft_shape = (
        sp_fft.next_fast_len(h + 4 * radius),
        sp_fft.next_fast_len(w + 4 * radius),
    )
    spectrum = sp_fft.rfft2(padded, fft_shape)
    crop = (slice(2 * radius, 2 * radius + h), slice(2 * radius, 2 * radius + w))

    energy = np.empty((len(bank), h, w))
    for i, (even_fft, odd_fft) in enumerate(
        _bank_kernel_ffts(params, bank.angles, fft_shape)
    ):
        even = sp_fft.irfft2(spectrum * even_fft, fft_shape)[crop]
        odd = sp_fft.irfft2(spectrum * odd_fft, fft_shape)[crop]
        energy[i] = np.hypot(even, odd)

    cmap = ContourMap(angles=bank.angles, energy=energy)
    # absolute epsilon: residual DC leakage of the truncated even kernel
    # stays below 1e-6 of its L1 norm, so constant regions never validate
    leak_floor = 1e-6 * float(np.abs(make_gabor_kernel(params, 0.0, 0.0)).sum())
    floor = max(DEFAULT_VALIDITY_FLOOR_FRACTION * float(energy.max()), leak_floor)
    return dominant_orientation(cmap, floor)


def dominant_orientation(cmap: ContourMap, floor: float) -> ContourMap:
    """Finalize the argmax-orientation and validity fields of a ContourMap.

    valid_mask is strength > floor; argmax ties resolve to the smallest
    bank angle. Returns a new map sharing the energy array.
    """
    if floor < 0:
        raise ValueError("validity floor must be >= 0")
    strength = cmap.energy.max(axis=0)
    # argmax returns the first maximal index, i.e. the smallest angle
    idx = cmap.energy.argmax(axis=0)
    orientation = np.asarray(cmap.angles)[idx]
    valid = strength > floor
    return replace(cmap, strength=strength, orientation=orientation, valid_mask=valid)


# 3x3 Gaussian used before Otsu thresholding; sigma = 0.8 px, weights
# normalized over the 3x3 support.
def _gaussian_3x3(sigma_px: float = 0.8) -> np.ndarray:
    coords = np.arange(-1, 2, dtype=np.float64)
    x, y = np.meshgrid(coords, coords)
    k = np.exp(-(x * x + y * y) / (2.0 * sigma_px * sigma_px))
    return k / k.sum()


def otsu_threshold(values: np.ndarray, bins: int = 256):
    """Otsu's threshold over a fixed [0, 1] histogram.

    Returns (threshold, degenerate). Values quantize to bin centers
    k/(bins-1); the best split k maximizes the between-class variance
    (ties resolve to the smallest k) and the returned threshold is the
    upper bin edge (k+0.5)/(bins-1), so `value > threshold` reproduces
    the class split on unquantized values. degenerate is True when all
    mass sits in a single bin.
    """
    quantized = np.clip(np.round(values * (bins - 1)), 0, bins - 1).astype(np.int64)
    hist = np.bincount(quantized.ravel(), minlength=bins).astype(np.float64)
    total = hist.sum()
    if np.count_nonzero(hist) <= 1:
        return 0.0, True

    levels = np.arange(bins, dtype=np.float64)
    w0 = np.cumsum(hist)
    w1 = total - w0
    mu0_sum = np.cumsum(hist * levels)
    mu_total = mu0_sum[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = mu0_sum / w0
        mu1 = (mu_total - mu0_sum) / w1
        between = w0 * w1 * (mu0 - mu1) ** 2
    between[~np.isfinite(between)] = -1.0
    k = int(np.argmax(between[:-1]))  # split after bin k; last bin can't split
    return (k + 0.5) / (bins - 1), False


def binarize_contours(image: np.ndarray) -> BinaryImage:
    """Smooth with the 3x3 Gaussian and binarize at the Otsu threshold.

    Constant images produce an all-false mask with the degenerate flag
    set instead of an error.
    """
    image = validate_gray(image)
    kernel = _gaussian_3x3()
    padded = np.pad(image, 1, mode="edge")
    smoothed = np.zeros_like(image)
    for dy in range(3):
        for dx in range(3):
            smoothed += kernel[dy, dx] * padded[dy:dy + image.shape[0],
                                                dx:dx + image.shape[1]]
    threshold, degenerate = otsu_threshold(smoothed)
    if degenerate:
        return BinaryImage(np.zeros(image.shape, dtype=bool), 0.0, True)
    return BinaryImage(smoothed > threshold, threshold, False)

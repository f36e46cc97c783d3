"""Element placement along contours and rendering of phosphene/segment stimuli.

Placement is a greedy maximal-strength loop with radius suppression
(Poisson-disk style): the strongest not-yet-suppressed valid contour
pixel receives an element oriented along the local tangent, then every
pixel within min_spacing of it is suppressed. The saturated result
defines the 100% level; lower fragmentation levels are nested prefixes
of the placement order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .filtering import ContourMap

# Nine fragmentation levels, geometric from 12% to 100%.
_LEVEL_COUNT = 9
_LEVEL_LOW, _LEVEL_HIGH = 12, 100


def fragmentation_levels() -> list:
    """The nine canonical fragmentation percentages: 12 ... 100, log-spaced."""
    ratio = (_LEVEL_HIGH / _LEVEL_LOW) ** (1.0 / (_LEVEL_COUNT - 1))
    return [int(math.floor(_LEVEL_LOW * ratio ** k + 0.5)) for k in range(_LEVEL_COUNT)]


LEVELS = tuple(fragmentation_levels())


@dataclass(frozen=True)
class PlacementConfig:
    """Element geometry and placement behavior, in pixels.

    Defaults render segment bars of 0.25 x 0.05 deg at 32 px/deg with
    spacing equal to the bar length, so segments cannot overlap by
    construction. jitter defaults to 0 (fully deterministic placement).
    """

    min_spacing: float = 8.0
    element_length: float = 8.0
    element_width: float = 1.6
    jitter: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (self.element_length > self.element_width > 0):
            raise ValueError("need element_length > element_width > 0")
        if self.min_spacing < 0.8 * self.element_length:
            raise ValueError("min_spacing must be >= 0.8 * element_length")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")


@dataclass(frozen=True)
class Element:
    """One placed fragment: center, tangent orientation, placement record."""

    x: float
    y: float
    orientation: float
    priority: float
    index: int

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "orientation": self.orientation,
            "priority": self.priority,
            "index": self.index,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Element":
        return cls(
            x=float(d["x"]), y=float(d["y"]), orientation=float(d["orientation"]),
            priority=float(d["priority"]), index=int(d["index"]),
        )


def saturate_place(cmap: ContourMap, config: PlacementConfig) -> list:
    """Greedy maximal placement on a finalized contour map.

    Returns the 100% element set ordered by placement (descending
    strength). Ties between equal-strength pixels resolve in row-major
    order. With jitter > 0, a jittered center is used only when it
    stays on canvas and keeps min_spacing to all earlier elements;
    otherwise the element falls back to the source pixel, so the
    non-overlap guarantee holds for any jitter.
    """
    if cmap.valid_mask is None or cmap.orientation is None:
        raise ValueError("contour map must be finalized (dominant_orientation)")
    h, w = cmap.shape
    score = np.where(cmap.valid_mask, cmap.strength, -np.inf)
    rng = np.random.default_rng(config.seed)
    spacing = config.min_spacing
    spacing_sq = spacing * spacing

    elements = []
    while True:
        flat = int(np.argmax(score))
        if not np.isfinite(score.flat[flat]):
            break
        row, col = divmod(flat, w)
        x, y = float(col), float(row)
        if config.jitter > 0:
            dx, dy = rng.uniform(-config.jitter, config.jitter, size=2)
            jx, jy = x + dx, y + dy
            on_canvas = 0.0 <= jx <= w - 1 and 0.0 <= jy <= h - 1
            if on_canvas and all(
                (jx - e.x) ** 2 + (jy - e.y) ** 2 >= spacing_sq for e in elements
            ):
                x, y = jx, jy
        elements.append(Element(
            x=x, y=y,
            orientation=float(cmap.orientation[row, col]),
            priority=float(cmap.strength[row, col]),
            index=len(elements),
        ))
        # suppress the exclusion disk around the placed center
        r0 = max(0, int(math.floor(y - spacing)))
        r1 = min(h, int(math.ceil(y + spacing)) + 1)
        c0 = max(0, int(math.floor(x - spacing)))
        c1 = min(w, int(math.ceil(x + spacing)) + 1)
        rows = np.arange(r0, r1, dtype=np.float64)[:, None]
        cols = np.arange(c0, c1, dtype=np.float64)[None, :]
        disk = (rows - y) ** 2 + (cols - x) ** 2 < spacing_sq
        score[r0:r1, c0:c1][disk] = -np.inf
        score[row, col] = -np.inf  # progress even under extreme jitter
    return elements


def subsample(elements: list, level: int, mode: str = "prefix",
              seed: int = 0) -> list:
    """Keep round(level/100 * N_max) elements of a saturated placement.

    The default prefix mode keeps the lowest placement indices, so the
    element sets are nested across levels. The alternative random mode
    draws a uniform subset (not nested) from a seeded generator.
    """
    if level not in LEVELS:
        raise ValueError(f"level {level} not one of the canonical levels {LEVELS}")
    n_max = len(elements)
    count = int(math.floor(level / 100.0 * n_max + 0.5))
    ordered = sorted(elements, key=lambda e: e.index)
    if mode == "prefix":
        return ordered[:count]
    if mode == "random":
        rng = np.random.default_rng(seed)
        keep = rng.choice(n_max, size=count, replace=False)
        keep = set(int(i) for i in keep)
        return [e for e in ordered if e.index in keep]
    raise ValueError(f"unknown subsample mode {mode!r}")


# Phosphene blobs are truncated at 2 sigma; bars get a 1 px anti-alias
# apron. Amplitudes are scaled to a common per-element luminous mass,
# slightly below the unit-amplitude blob mass so that every element
# peaks below 1.0 regardless of subpixel position.
_MASS_HEADROOM = 0.97


def _phosphene_patch(cx: float, cy: float, sigma: float, shape) -> tuple:
    radius = 2.0 * sigma
    r0 = max(0, int(math.floor(cy - radius)))
    r1 = min(shape[0], int(math.ceil(cy + radius)) + 1)
    c0 = max(0, int(math.floor(cx - radius)))
    c1 = min(shape[1], int(math.ceil(cx + radius)) + 1)
    rows = np.arange(r0, r1, dtype=np.float64)[:, None]
    cols = np.arange(c0, c1, dtype=np.float64)[None, :]
    d_sq = (rows - cy) ** 2 + (cols - cx) ** 2
    alpha = np.where(d_sq <= radius * radius,
                     np.exp(-d_sq / (2.0 * sigma * sigma)), 0.0)
    return alpha, (slice(r0, r1), slice(c0, c1))


def _segment_patch(cx: float, cy: float, angle: float, length: float,
                   width: float, shape) -> tuple:
    radius = length / 2.0 + 1.0
    r0 = max(0, int(math.floor(cy - radius)))
    r1 = min(shape[0], int(math.ceil(cy + radius)) + 1)
    c0 = max(0, int(math.floor(cx - radius)))
    c1 = min(shape[1], int(math.ceil(cx + radius)) + 1)
    rows = np.arange(r0, r1, dtype=np.float64)[:, None]
    cols = np.arange(c0, c1, dtype=np.float64)[None, :]
    # coordinates in the bar frame: u along the bar, v across it
    u = (cols - cx) * np.cos(angle) + (rows - cy) * np.sin(angle)
    v = -(cols - cx) * np.sin(angle) + (rows - cy) * np.cos(angle)
    cover_u = np.clip(length / 2.0 + 0.5 - np.abs(u), 0.0, 1.0)
    cover_v = np.clip(width / 2.0 + 0.5 - np.abs(v), 0.0, 1.0)
    return cover_u * cover_v, (slice(r0, r1), slice(c0, c1))


def _unit_masses(config: PlacementConfig) -> tuple:
    """Unit-amplitude masses of the two element kinds and the common target."""
    sigma = config.element_width / 2.0
    blob_mass = 2.0 * np.pi * sigma * sigma * (1.0 - np.exp(-2.0))
    bar_mass = config.element_length * config.element_width
    target = _MASS_HEADROOM * min(blob_mass, bar_mass)
    return blob_mass, bar_mass, target


def render_elements(elements: list, kind: str, shape, config: PlacementConfig,
                    background=0.0, foreground=1.0) -> np.ndarray:
    """Render an element set as a phosphene or segment stimulus.

    Phosphenes are isotropic Gaussian blobs (orientation ignored);
    segments are anti-aliased bars rotated to each element's tangent
    orientation. Per-element luminous mass is normalized to a common
    target so the two conditions differ in orientation information,
    not energy. Scalar colors give a grayscale raster; an RGB triple
    for either color gives an (H, W, 3) raster.
    """
    if kind not in ("phosphene", "segment"):
        raise ValueError(f"kind must be 'phosphene' or 'segment', got {kind!r}")
    bg = np.atleast_1d(np.asarray(background, dtype=np.float64))
    fg = np.atleast_1d(np.asarray(foreground, dtype=np.float64))
    chromatic = bg.size == 3 or fg.size == 3
    if chromatic:
        bg, fg = np.broadcast_to(bg, (3,)), np.broadcast_to(fg, (3,))
    if np.array_equal(bg, fg):
        raise ValueError("zero-contrast stimulus")

    h, w = shape
    for e in elements:
        if not (0.0 <= e.x <= w - 1 and 0.0 <= e.y <= h - 1):
            raise ValueError(f"element {e.index} at ({e.x}, {e.y}) outside canvas")

    _, _, target_mass = _unit_masses(config)
    sigma = config.element_width / 2.0
    span = int(math.ceil(config.element_length + 4.0 * sigma)) + 4
    alpha = np.zeros((h, w))
    for e in elements:
        # unclipped mass at the same subpixel phase, away from any border
        fx, fy = e.x % 1.0, e.y % 1.0
        if kind == "phosphene":
            patch, window = _phosphene_patch(e.x, e.y, sigma, shape)
            full, _ = _phosphene_patch(span + fx, span + fy, sigma,
                                       (3 * span, 3 * span))
        else:
            patch, window = _segment_patch(
                e.x, e.y, e.orientation, config.element_length,
                config.element_width, shape)
            full, _ = _segment_patch(
                span + fx, span + fy, e.orientation, config.element_length,
                config.element_width, (3 * span, 3 * span))
        mass = full.sum()
        if mass <= 0:
            continue
        scaled = patch * (target_mass / mass)
        region = alpha[window]
        np.maximum(region, scaled, out=region)

    alpha = np.clip(alpha, 0.0, 1.0)
    if chromatic:
        return bg[None, None, :] + alpha[..., None] * (fg - bg)[None, None, :]
    return bg.item() + alpha * (fg.item() - bg.item())

"""Procedural background-removed object images for the 12 categories.

Stand-ins for photographic background-extracted sources: each category
gets a parametric silhouette with seeded per-variant jitter in
proportions, pose, and shading. Good enough to exercise the full
pipeline (salient closed contours, 12-way separable shapes) without
shipping photographs.
"""

from __future__ import annotations

import hashlib

import numpy as np
from PIL import Image

from .categories import CATEGORIES


def _rng_for(seed: int, category: str, variant: int) -> np.random.Generator:
    digest = hashlib.sha256(f"{seed}|{category}|{variant}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


class _Board:
    """Coordinate grid (unit square) with per-variant pose and shape jitter.

    Variants of one category differ by mirror flip, rotation, a smooth
    coordinate warp (boundary wobble), and the drawers' proportion
    jitter, so coarse element positions alone do not give the category
    away.
    """

    def __init__(self, size: int, rng: np.random.Generator):
        c = np.linspace(0.0, 1.0, size)
        x, y = np.meshgrid(c, c)
        if rng.uniform() < 0.5:
            x = 1.0 - x
        angle = rng.uniform(-0.5, 0.5)
        scale = rng.uniform(0.85, 1.05)
        cx, cy = 0.5 + rng.uniform(-0.05, 0.05, size=2)
        xr = (np.cos(angle) * (x - cx) + np.sin(angle) * (y - cy)) / scale + 0.5
        yr = (-np.sin(angle) * (x - cx) + np.cos(angle) * (y - cy)) / scale + 0.5
        # low-frequency warp: contours wobble differently per variant
        amp = rng.uniform(0.012, 0.03)
        fx, fy = rng.uniform(1.5, 3.5, size=2)
        px, py = rng.uniform(0, 2 * np.pi, size=2)
        self.x = xr + amp * np.sin(2 * np.pi * fy * yr + py)
        self.y = yr + amp * np.sin(2 * np.pi * fx * xr + px)
        self.mask = np.zeros((size, size), dtype=bool)

    def disk(self, cx, cy, r):
        return (self.x - cx) ** 2 + (self.y - cy) ** 2 <= r * r

    def ellipse(self, cx, cy, rx, ry):
        return ((self.x - cx) / rx) ** 2 + ((self.y - cy) / ry) ** 2 <= 1.0

    def box(self, x0, y0, x1, y1):
        return (self.x >= x0) & (self.x <= x1) & (self.y >= y0) & (self.y <= y1)

    def rot_box(self, cx, cy, half_l, half_w, angle):
        u = (self.x - cx) * np.cos(angle) + (self.y - cy) * np.sin(angle)
        v = -(self.x - cx) * np.sin(angle) + (self.y - cy) * np.cos(angle)
        return (np.abs(u) <= half_l) & (np.abs(v) <= half_w)

    def tri(self, p0, p1, p2):
        def half(pa, pb):
            return ((pb[0] - pa[0]) * (self.y - pa[1])
                    - (pb[1] - pa[1]) * (self.x - pa[0]))
        d0, d1, d2 = half(p0, p1), half(p1, p2), half(p2, p0)
        neg = (d0 < 0) | (d1 < 0) | (d2 < 0)
        pos = (d0 > 0) | (d1 > 0) | (d2 > 0)
        return ~(neg & pos)

    def add(self, m):
        self.mask |= m

    def cut(self, m):
        self.mask &= ~m


def _draw_banana(b, rng):
    r = 0.33 * rng.uniform(0.9, 1.1)
    off = 0.13 * rng.uniform(0.85, 1.15)
    b.add(b.disk(0.5, 0.45, r))
    b.cut(b.disk(0.5, 0.45 - off, r))


def _draw_binoculars(b, rng):
    r = 0.16 * rng.uniform(0.9, 1.1)
    gap = 0.36 * rng.uniform(0.95, 1.1)
    b.add(b.disk(0.5 - gap / 2, 0.55, r))
    b.add(b.disk(0.5 + gap / 2, 0.55, r))
    b.add(b.box(0.5 - gap / 2, 0.42, 0.5 + gap / 2, 0.52))
    b.add(b.disk(0.5 - gap / 2, 0.35, r * 0.6))
    b.add(b.disk(0.5 + gap / 2, 0.35, r * 0.6))


def _draw_boot(b, rng):
    shaft_w = 0.17 * rng.uniform(0.9, 1.1)
    foot_l = 0.34 * rng.uniform(0.9, 1.15)
    b.add(b.box(0.38, 0.2, 0.38 + shaft_w, 0.72))
    b.add(b.box(0.38, 0.56, 0.38 + foot_l, 0.72))
    b.add(b.disk(0.38 + foot_l, 0.64, 0.08))


def _draw_bowl(b, rng):
    rx = 0.34 * rng.uniform(0.9, 1.1)
    ry = 0.24 * rng.uniform(0.85, 1.1)
    body = b.ellipse(0.5, 0.45, rx, ry)
    b.add(body & (b.y >= 0.45))
    b.add(b.box(0.5 - rx, 0.43, 0.5 + rx, 0.47))
    b.add(b.box(0.4, 0.45 + ry - 0.03, 0.6, 0.45 + ry + 0.03))


def _draw_cup(b, rng):
    w = 0.26 * rng.uniform(0.9, 1.1)
    h = 0.34 * rng.uniform(0.9, 1.1)
    b.add(b.box(0.5 - w / 2, 0.5 - h / 2, 0.5 + w / 2, 0.5 + h / 2))
    hr = 0.11 * rng.uniform(0.85, 1.1)
    handle = b.disk(0.5 + w / 2, 0.5, hr) & ~b.disk(0.5 + w / 2, 0.5, hr * 0.55)
    b.add(handle & (b.x >= 0.5 + w / 2))


def _draw_glasses(b, rng):
    r = 0.15 * rng.uniform(0.9, 1.05)
    gap = 0.36 * rng.uniform(0.95, 1.08)
    ring_w = 0.62
    left = b.disk(0.5 - gap / 2, 0.5, r) & ~b.disk(0.5 - gap / 2, 0.5, r * ring_w)
    right = b.disk(0.5 + gap / 2, 0.5, r) & ~b.disk(0.5 + gap / 2, 0.5, r * ring_w)
    b.add(left)
    b.add(right)
    b.add(b.box(0.5 - gap / 2 + r * 0.8, 0.47, 0.5 + gap / 2 - r * 0.8, 0.51))
    b.add(b.rot_box(0.5 - gap / 2 - r - 0.07, 0.47, 0.08, 0.015, rng.uniform(-0.25, 0.0)))
    b.add(b.rot_box(0.5 + gap / 2 + r + 0.07, 0.47, 0.08, 0.015, rng.uniform(0.0, 0.25)))


def _draw_hat(b, rng):
    brim_rx = 0.36 * rng.uniform(0.9, 1.1)
    dome_r = 0.2 * rng.uniform(0.9, 1.1)
    b.add(b.ellipse(0.5, 0.58, brim_rx, 0.07))
    dome = b.disk(0.5, 0.58, dome_r)
    b.add(dome & (b.y <= 0.58))
    b.add(b.box(0.5 - dome_r, 0.40, 0.5 + dome_r, 0.58))


def _draw_lamp(b, rng):
    top = 0.10 * rng.uniform(0.9, 1.1)
    bottom = 0.26 * rng.uniform(0.9, 1.1)
    b.add(b.tri((0.5 - bottom, 0.48), (0.5 + bottom, 0.48), (0.5, 0.18)))
    b.cut(b.tri((0.5 - bottom, 0.44), (0.5 + bottom, 0.44), (0.5, 0.14)) & (b.y < 0.25))
    b.add(b.box(0.5 - top / 4, 0.22, 0.5 + top / 4, 0.3))
    b.add(b.box(0.485, 0.48, 0.515, 0.74))
    b.add(b.ellipse(0.5, 0.76, 0.16, 0.045))


def _draw_pan(b, rng):
    r = 0.24 * rng.uniform(0.9, 1.1)
    b.add(b.disk(0.42, 0.55, r))
    b.cut(b.disk(0.42, 0.55, r * 0.72))
    b.add(b.disk(0.42, 0.55, r * 0.6))
    angle = rng.uniform(-0.2, 0.2)
    b.add(b.rot_box(0.42 + r + 0.16, 0.55 - 0.16 * np.tan(angle), 0.17, 0.025, angle))


def _draw_sewing_machine(b, rng):
    base_w = 0.56 * rng.uniform(0.95, 1.05)
    b.add(b.box(0.5 - base_w / 2, 0.62, 0.5 + base_w / 2, 0.72))
    b.add(b.box(0.5 + base_w / 2 - 0.14, 0.3, 0.5 + base_w / 2, 0.66))
    b.add(b.box(0.5 - base_w / 2 + 0.04, 0.3, 0.5 + base_w / 2, 0.42))
    b.add(b.box(0.5 - base_w / 2 + 0.04, 0.42, 0.5 - base_w / 2 + 0.12, 0.52))
    b.add(b.disk(0.5 + base_w / 2 - 0.07, 0.36, 0.05 * rng.uniform(0.8, 1.2)))


def _draw_shovel(b, rng):
    angle = rng.uniform(-0.15, 0.15)
    b.add(b.rot_box(0.5, 0.42, 0.26, 0.018, np.pi / 2 + angle))
    b.add(b.tri((0.38, 0.66), (0.62, 0.66), (0.5, 0.88)))
    b.add(b.box(0.38, 0.62, 0.62, 0.7))
    b.add(b.box(0.44, 0.12, 0.56, 0.18))
    b.cut(b.box(0.47, 0.12, 0.53, 0.155))


def _draw_truck(b, rng):
    cab_w = 0.16 * rng.uniform(0.9, 1.1)
    cargo_w = 0.4 * rng.uniform(0.9, 1.1)
    b.add(b.box(0.2, 0.35, 0.2 + cargo_w, 0.6))
    b.add(b.box(0.2 + cargo_w + 0.02, 0.44, 0.2 + cargo_w + 0.02 + cab_w, 0.6))
    b.add(b.box(0.2 + cargo_w + 0.05, 0.36, 0.2 + cargo_w + 0.02 + cab_w, 0.44))
    for wx in (0.3, 0.44, 0.2 + cargo_w + 0.02 + cab_w / 2):
        b.add(b.disk(wx, 0.63, 0.06))
        b.cut(b.disk(wx, 0.63, 0.025))


_DRAWERS = {
    "banana": _draw_banana,
    "binoculars": _draw_binoculars,
    "boot": _draw_boot,
    "bowl": _draw_bowl,
    "cup": _draw_cup,
    "glasses": _draw_glasses,
    "hat": _draw_hat,
    "lamp": _draw_lamp,
    "pan": _draw_pan,
    "sewing machine": _draw_sewing_machine,
    "shovel": _draw_shovel,
    "truck": _draw_truck,
}

_BASE_COLORS = {
    "banana": (0.92, 0.85, 0.25),
    "binoculars": (0.22, 0.22, 0.26),
    "boot": (0.45, 0.28, 0.14),
    "bowl": (0.75, 0.33, 0.25),
    "cup": (0.85, 0.85, 0.88),
    "glasses": (0.3, 0.3, 0.34),
    "hat": (0.5, 0.38, 0.2),
    "lamp": (0.85, 0.74, 0.4),
    "pan": (0.35, 0.35, 0.38),
    "sewing machine": (0.3, 0.4, 0.55),
    "shovel": (0.55, 0.45, 0.3),
    "truck": (0.7, 0.2, 0.2),
}


def make_source(category: str, variant: int, size: int = 192,
                seed: int = 0) -> np.ndarray:
    """Render one synthetic RGBA object; uint8 (size, size, 4)."""
    if category not in _DRAWERS:
        raise ValueError(f"unknown category {category!r}")
    rng = _rng_for(seed, category, variant)
    board = _Board(size, rng)
    _DRAWERS[category](board, rng)

    base = np.array(_BASE_COLORS[category]) * rng.uniform(0.85, 1.15)
    shade = 0.75 + 0.5 * board.x + 0.25 * board.y  # simple diagonal lighting
    rgb = np.clip(base[None, None, :] * shade[..., None], 0.0, 1.0)
    rgba = np.zeros((size, size, 4), dtype=np.uint8)
    rgba[..., :3] = np.round(rgb * 255).astype(np.uint8)
    rgba[..., 3] = np.where(board.mask, 255, 0).astype(np.uint8)
    return rgba


def write_source_tree(root, per_category: int = 4, size: int = 192,
                      seed: int = 0) -> list:
    """Write `<category>/<category>_<k>.png` RGBA files; returns the paths."""
    from pathlib import Path

    root = Path(root)
    paths = []
    for category in CATEGORIES:
        directory = root / category.replace(" ", "_")
        directory.mkdir(parents=True, exist_ok=True)
        for k in range(per_category):
            rgba = make_source(category, k, size=size, seed=seed)
            path = directory / f"{category.replace(' ', '_')}_{k:02d}.png"
            Image.fromarray(rgba, mode="RGBA").save(path, format="PNG")
            paths.append(path)
    return paths

"""Batch stimulus dataset construction.

One build emits 19 generated datasets (1 contour + 9 phosphene levels
+ 9 segment levels) plus the RGB passthrough, with a manifest that
records per-stimulus specs, element counts, and content digests so a
rerun with the same inputs and seed is verifiably identical.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
from PIL import Image

from . import __version__
from .categories import CATEGORIES, normalize_category
from .filtering import GaborParams, OrientationBank, contour_energy
from .images import rgb_to_gray, write_gray_png, write_rgb_png
from .placement import LEVELS, PlacementConfig, render_elements, saturate_place, subsample

FRAGMENTED_CONDITIONS = ("phosphene", "segment")
CONDITIONS = ("rgb", "contour") + FRAGMENTED_CONDITIONS
REPLICA_OBJECTS_PER_CATEGORY = 4


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a tuple of values (platform independent)."""
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.sha256(text.encode()).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass
class SourceImage:
    id: str
    category: str
    rgba: np.ndarray  # (H, W, 4) float64 in [0, 1]
    provenance: str = ""


@dataclass(frozen=True)
class StimulusSpec:
    source_id: str
    condition: str
    level: int = None  # present iff condition is fragmented
    background: tuple = (0.0,)
    seed: int = 0

    def __post_init__(self):
        if self.condition not in CONDITIONS:
            raise ValueError(f"unknown condition {self.condition!r}")
        fragmented = self.condition in FRAGMENTED_CONDITIONS
        if fragmented and self.level not in LEVELS:
            raise ValueError("fragmented conditions need a canonical level")
        if not fragmented and self.level is not None:
            raise ValueError(f"{self.condition} takes no level")


@dataclass
class StimulusRecord:
    spec: StimulusSpec
    path: str
    category: str
    element_count: int
    n_max: int
    digest: str

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spec"]["background"] = list(self.spec.background)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StimulusRecord":
        spec = dict(d["spec"])
        spec["background"] = tuple(spec["background"])
        return cls(spec=StimulusSpec(**spec), path=d["path"], category=d["category"],
                   element_count=d["element_count"], n_max=d["n_max"], digest=d["digest"])


@dataclass
class DatasetManifest:
    version: str
    global_seed: int
    canvas: tuple
    records: list = field(default_factory=list)

    def save(self, path) -> None:
        doc = {
            "version": self.version,
            "global_seed": self.global_seed,
            "canvas": list(self.canvas),
            "records": [r.to_dict() for r in self.records],
        }
        Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True))

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        doc = json.loads(Path(path).read_text())
        return cls(
            version=doc["version"],
            global_seed=doc["global_seed"],
            canvas=tuple(doc["canvas"]),
            records=[StimulusRecord.from_dict(r) for r in doc["records"]],
        )


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs of a dataset build; defaults reproduce the replica geometry."""

    canvas: int = 256
    pixels_per_degree: float = 32.0
    fill_fraction: float = 0.8  # object bbox relative to canvas side
    background: tuple = (0.0,)  # scalar gray or RGB triple
    foreground: tuple = (1.0,)
    normalize_contrast: bool = True  # divide contour map by its max
    orientations: int = 8
    global_seed: int = 0xB055
    placement: PlacementConfig = PlacementConfig()
    gabor: GaborParams = None

    def resolved_gabor(self) -> GaborParams:
        if self.gabor is not None:
            return self.gabor
        return GaborParams(pixels_per_degree=self.pixels_per_degree)


def load_source(path, expected_category: str = None) -> SourceImage:
    """Load and validate one background-removed RGBA source.

    The category comes from the parent directory name (underscores map
    to spaces); the alpha channel must be present with 1%..90% of
    pixels opaque.
    """
    path = Path(path)
    with Image.open(path) as im:
        if im.mode in ("RGBA", "LA"):
            rgba = np.asarray(im.convert("RGBA"), dtype=np.float64) / 255.0
        elif im.mode == "P" and "transparency" in im.info:
            rgba = np.asarray(im.convert("RGBA"), dtype=np.float64) / 255.0
        else:
            raise ValueError(f"{path.name}: background not removed (no alpha channel)")
    opaque = float(np.mean(rgba[..., 3] > 0))
    if opaque > 0.90:
        raise ValueError(f"{path.name}: background not removed ({opaque:.0%} opaque)")
    if opaque < 0.01:
        raise ValueError(f"{path.name}: image nearly empty ({opaque:.2%} opaque)")
    category = normalize_category(expected_category or path.parent.name)
    if category not in CATEGORIES:
        raise ValueError(f"category {category!r} not in the 12-label set")
    return SourceImage(id=path.stem, category=category, rgba=rgba,
                       provenance=str(path))


def discover_sources(src_dir) -> list:
    """Load every `<category>/<object>.png` under a source tree."""
    src_dir = Path(src_dir)
    sources = []
    for sub in sorted(p for p in src_dir.iterdir() if p.is_dir()):
        if normalize_category(sub.name) not in CATEGORIES:
            raise ValueError(f"category {sub.name!r} not in the 12-label set")
        for png in sorted(sub.glob("*.png")):
            sources.append(load_source(png))
    seen = {}
    for s in sources:
        if s.id in seen:  # stems may collide across categories
            s.id = f"{s.category.replace(' ', '_')}_{s.id}"
        seen[s.id] = s
    return sources


def generate_noise_mask(size, seed: int) -> np.ndarray:
    """Seeded 1/f noise image, rescaled to [0, 1].

    Synthesis happens in the frequency domain: phases come from a
    unit-variance white field, the amplitude is set to exactly 1/f in
    radial spatial frequency with the DC term zeroed, and the inverse
    transform is affinely rescaled to [0, 1].
    """
    if np.isscalar(size):
        h = w = int(size)
    else:
        h, w = (int(v) for v in size)
    if h <= 0 or w <= 0:
        raise ValueError("mask size must be positive")
    rng = np.random.default_rng(seed)
    white = rng.standard_normal((h, w))
    spectrum = np.fft.fft2(white)
    magnitude = np.abs(spectrum)
    magnitude[magnitude == 0] = 1.0
    phases = spectrum / magnitude

    fy = np.fft.fftfreq(h)[:, None] * h
    fx = np.fft.fftfreq(w)[None, :] * w
    freq = np.hypot(fy, fx)  # cycles per image
    amplitude = np.zeros_like(freq)
    nonzero = freq > 0
    amplitude[nonzero] = 1.0 / freq[nonzero]

    noise = np.fft.ifft2(phases * amplitude).real
    low, high = noise.min(), noise.max()
    if high == low:
        return np.full((h, w), 0.5)
    return (noise - low) / (high - low)


def _scale_to_canvas(rgba: np.ndarray, canvas: int, fill_fraction: float) -> np.ndarray:
    """Fit the alpha bounding box to fill_fraction of the canvas side."""
    alpha = rgba[..., 3]
    rows = np.flatnonzero(alpha.any(axis=1))
    cols = np.flatnonzero(alpha.any(axis=0))
    if rows.size == 0:
        raise ValueError("source image has empty alpha")
    crop = rgba[rows[0]:rows[-1] + 1, cols[0]:cols[-1] + 1]
    box_h, box_w = crop.shape[:2]
    scale = fill_fraction * canvas / max(box_h, box_w)
    new_h = max(1, int(round(box_h * scale)))
    new_w = max(1, int(round(box_w * scale)))
    im = Image.fromarray(np.round(crop * 255).astype(np.uint8), mode="RGBA")
    im = im.resize((new_w, new_h), resample=Image.BILINEAR)
    resized = np.asarray(im, dtype=np.float64) / 255.0
    out = np.zeros((canvas, canvas, 4))
    r0 = (canvas - new_h) // 2
    c0 = (canvas - new_w) // 2
    out[r0:r0 + new_h, c0:c0 + new_w] = resized
    return out


def _color(value) -> tuple:
    t = tuple(float(v) for v in np.atleast_1d(value))
    if len(t) not in (1, 3):
        raise ValueError("colors are scalar gray or RGB triples")
    return t


def _as_render_color(t: tuple):
    return t[0] if len(t) == 1 else t


def _save_stimulus(path: Path, image: np.ndarray) -> str:
    path.parent.mkdir(parents=True, exist_ok=True)
    if image.ndim == 2:
        write_gray_png(path, np.clip(image, 0.0, 1.0))
    else:
        write_rgb_png(path, image)
    digest = hashlib.sha256(path.read_bytes()).hexdigest()
    return f"sha256:{digest}"


def _build_one_source(source: SourceImage, config: PipelineConfig,
                      out_dir: Path) -> list:
    canvas = config.canvas
    background = _color(config.background)
    foreground = _color(config.foreground)
    scaled = _scale_to_canvas(source.rgba, canvas, config.fill_fraction)
    gray = np.clip(rgb_to_gray(scaled[..., :3]) * scaled[..., 3], 0.0, 1.0)

    bank = OrientationBank.evenly_spaced(config.orientations)
    cmap = contour_energy(gray, config.resolved_gabor(), bank)

    contour_img = cmap.strength.copy()
    if config.normalize_contrast and contour_img.max() > 0:
        contour_img /= contour_img.max()
    contour_img = np.clip(contour_img, 0.0, 1.0)

    placement = PlacementConfig(
        min_spacing=config.placement.min_spacing,
        element_length=config.placement.element_length,
        element_width=config.placement.element_width,
        jitter=config.placement.jitter,
        seed=derive_seed(config.global_seed, source.id, "placement"),
    )
    saturated = saturate_place(cmap, placement)
    n_max = len(saturated)

    records = []

    def emit(spec: StimulusSpec, image: np.ndarray, count: int,
             elements=None) -> None:
        if spec.level is None:
            rel = Path(spec.condition) / f"{source.id}.png"
        else:
            rel = Path(spec.condition) / str(spec.level) / f"{source.id}.png"
        path = out_dir / rel
        digest = _save_stimulus(path, image)
        if elements is not None:
            sidecar = path.with_suffix(".json")
            sidecar.write_text(json.dumps([e.to_dict() for e in elements]))
        records.append(StimulusRecord(
            spec=spec, path=str(rel), category=source.category,
            element_count=count, n_max=n_max, digest=digest,
        ))

    # RGB passthrough: full color composited over the background color
    bg_rgb = np.array(background if len(background) == 3 else background * 3)
    rgb = bg_rgb[None, None, :] + scaled[..., 3:4] * (scaled[..., :3] - bg_rgb)
    emit(StimulusSpec(source.id, "rgb", None, background,
                      derive_seed(config.global_seed, source.id, "rgb", "")),
         np.clip(rgb, 0.0, 1.0), n_max)

    emit(StimulusSpec(source.id, "contour", None, background,
                      derive_seed(config.global_seed, source.id, "contour", "")),
         contour_img, n_max)

    for condition in FRAGMENTED_CONDITIONS:
        for level in LEVELS:
            subset = subsample(saturated, level)
            image = render_elements(
                subset, condition, (canvas, canvas), placement,
                background=_as_render_color(background),
                foreground=_as_render_color(foreground),
            )
            spec = StimulusSpec(
                source.id, condition, level, background,
                derive_seed(config.global_seed, source.id, condition, level),
            )
            emit(spec, image, len(subset), subset)
    return records


def build_dataset(sources: list, config: PipelineConfig, out_dir,
                  replica: bool = False, jobs: int = 1) -> DatasetManifest:
    """Build the full 19-dataset tree (+ RGB) for a list of sources.

    In replica mode the sources must cover all 12 categories with 4
    objects each (the 528-stimulus-per-participant layout). Returns
    the manifest, also written to `<out_dir>/manifest.json`.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    ids = [s.id for s in sources]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate source ids")
    if replica:
        gaps = []
        for category in CATEGORIES:
            have = sum(1 for s in sources if s.category == category)
            if have != REPLICA_OBJECTS_PER_CATEGORY:
                gaps.append(f"{category}: {have}/{REPLICA_OBJECTS_PER_CATEGORY}")
        if gaps:
            raise ValueError("replica mode needs 12 x 4 sources; gaps: "
                             + "; ".join(gaps))

    if jobs <= 1 or len(sources) <= 1:
        batches = [_build_one_source(s, config, out_dir) for s in sources]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            batches = list(pool.map(
                lambda s: _build_one_source(s, config, out_dir), sources))

    records = [r for batch in batches for r in batch]
    records.sort(key=lambda r: r.path)
    manifest = DatasetManifest(
        version=__version__, global_seed=config.global_seed,
        canvas=(config.canvas, config.canvas), records=records,
    )
    manifest.save(out_dir / "manifest.json")
    return manifest


def default_jobs() -> int:
    env = os.environ.get("CONTOUR_BENCH_JOBS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1

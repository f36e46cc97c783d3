"""Source loading, 1/f masks, and dataset builds."""

import json
from collections import Counter
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from contour_bench.images import read_gray_png
from contour_bench.pipeline import (
    DatasetManifest,
    PipelineConfig,
    build_dataset,
    derive_seed,
    discover_sources,
    generate_noise_mask,
    load_source,
)
from contour_bench.synth import make_source, write_source_tree

FAST_CONFIG = PipelineConfig(canvas=128, pixels_per_degree=16.0)


def radial_slope(mask: np.ndarray, f_low: float = 4.0, f_high: float = 40.0) -> float:
    """Spectral regression oracle: slope of log amplitude vs log frequency."""
    h, w = mask.shape
    spectrum = np.abs(np.fft.fft2(mask - mask.mean()))
    fy = np.fft.fftfreq(h)[:, None] * h
    fx = np.fft.fftfreq(w)[None, :] * w
    freq = np.hypot(fy, fx)
    bins = np.round(freq).astype(int)
    log_f, log_a = [], []
    for f in range(int(f_low), int(f_high) + 1):
        sel = bins == f
        if sel.any():
            log_f.append(np.log10(f))
            log_a.append(np.log10(spectrum[sel].mean()))
    slope = np.polyfit(log_f, log_a, 1)[0]
    return float(slope)


class TestLoadSource:
    def test_valid_synthetic_source(self, tmp_path):
        rgba = make_source("banana", 0)
        directory = tmp_path / "banana"
        directory.mkdir()
        Image.fromarray(rgba, "RGBA").save(directory / "banana_00.png")
        source = load_source(directory / "banana_00.png")
        assert source.category == "banana"
        assert source.rgba.shape[2] == 4

    def test_fully_opaque_rejected(self, tmp_path):
        directory = tmp_path / "cup"
        directory.mkdir()
        rgba = np.full((32, 32, 4), 255, dtype=np.uint8)
        Image.fromarray(rgba, "RGBA").save(directory / "solid.png")
        with pytest.raises(ValueError, match="background not removed"):
            load_source(directory / "solid.png")

    def test_no_alpha_rejected(self, tmp_path):
        directory = tmp_path / "cup"
        directory.mkdir()
        rgb = np.zeros((32, 32, 3), dtype=np.uint8)
        Image.fromarray(rgb, "RGB").save(directory / "flat.png")
        with pytest.raises(ValueError, match="background not removed"):
            load_source(directory / "flat.png")

    def test_unknown_category_rejected(self, tmp_path):
        directory = tmp_path / "zebra"
        directory.mkdir()
        rgba = make_source("banana", 0)
        Image.fromarray(rgba, "RGBA").save(directory / "z.png")
        with pytest.raises(ValueError, match="not in the 12-label set"):
            load_source(directory / "z.png")

    def test_pan_directory_maps_to_pan(self, tmp_path):
        directory = tmp_path / "pan"
        directory.mkdir()
        Image.fromarray(make_source("pan", 1), "RGBA").save(directory / "p.png")
        assert load_source(directory / "p.png").category == "pan"

    def test_underscore_directory_normalizes(self, tmp_path):
        directory = tmp_path / "sewing_machine"
        directory.mkdir()
        Image.fromarray(make_source("sewing machine", 0), "RGBA").save(
            directory / "s.png")
        assert load_source(directory / "s.png").category == "sewing machine"


class TestNoiseMask:
    def test_one_over_f_slope(self):
        for seed in range(5):
            mask = generate_noise_mask(128, seed)
            assert radial_slope(mask) == pytest.approx(-1.0, abs=0.1)

    def test_range(self):
        mask = generate_noise_mask(96, 3)
        assert mask.min() >= 0.0 and mask.max() <= 1.0
        assert mask.min() == 0.0 and mask.max() == 1.0  # affine rescale hits both

    def test_determinism(self):
        assert np.array_equal(generate_noise_mask(64, 9),
                              generate_noise_mask(64, 9))
        assert not np.array_equal(generate_noise_mask(64, 9),
                                  generate_noise_mask(64, 10))

    def test_rectangular(self):
        mask = generate_noise_mask((32, 64), 1)
        assert mask.shape == (32, 64)

    def test_bad_size(self):
        with pytest.raises(ValueError):
            generate_noise_mask(0, 1)


class TestDeriveSeed:
    def test_stable_values(self):
        assert derive_seed(1, "a", "b") == derive_seed(1, "a", "b")
        assert derive_seed(1, "a", "b") != derive_seed(1, "a", "c")

    def test_64_bit_range(self):
        value = derive_seed("x")
        assert 0 <= value < 2 ** 64


class TestBuildDataset:
    def test_single_source_file_arithmetic(self, tmp_path):
        write_source_tree(tmp_path / "src", per_category=1)
        sources = discover_sources(tmp_path / "src")[:1]
        manifest = build_dataset(sources, FAST_CONFIG, tmp_path / "out")
        assert len(manifest.records) == 20  # 9 + 9 + contour + rgb
        conditions = Counter(r.spec.condition for r in manifest.records)
        assert conditions == {"phosphene": 9, "segment": 9, "contour": 1, "rgb": 1}
        for record in manifest.records:
            assert (tmp_path / "out" / record.path).is_file()

    def test_reproducible_manifest(self, tmp_path):
        write_source_tree(tmp_path / "src", per_category=1)
        sources = discover_sources(tmp_path / "src")[:2]
        build_dataset(sources, FAST_CONFIG, tmp_path / "a")
        build_dataset(sources, FAST_CONFIG, tmp_path / "b", jobs=2)
        a = json.loads((tmp_path / "a" / "manifest.json").read_text())
        b = json.loads((tmp_path / "b" / "manifest.json").read_text())
        assert a == b

    def test_digests_match_files(self, tmp_path):
        import hashlib

        write_source_tree(tmp_path / "src", per_category=1)
        sources = discover_sources(tmp_path / "src")[:1]
        manifest = build_dataset(sources, FAST_CONFIG, tmp_path / "out")
        for record in manifest.records:
            digest = hashlib.sha256(
                (tmp_path / "out" / record.path).read_bytes()).hexdigest()
            assert record.digest == f"sha256:{digest}"

    def test_replica_mode_reports_gaps(self, tmp_path):
        write_source_tree(tmp_path / "src", per_category=1)
        sources = discover_sources(tmp_path / "src")
        with pytest.raises(ValueError, match="banana: 1/4"):
            build_dataset(sources, FAST_CONFIG, tmp_path / "out", replica=True)

    def test_manifest_roundtrip(self, tmp_path):
        write_source_tree(tmp_path / "src", per_category=1)
        sources = discover_sources(tmp_path / "src")[:1]
        manifest = build_dataset(sources, FAST_CONFIG, tmp_path / "out")
        loaded = DatasetManifest.load(tmp_path / "out" / "manifest.json")
        assert loaded == manifest

    def test_element_sidecars(self, tmp_path):
        write_source_tree(tmp_path / "src", per_category=1)
        sources = discover_sources(tmp_path / "src")[:1]
        manifest = build_dataset(sources, FAST_CONFIG, tmp_path / "out")
        fragmented = [r for r in manifest.records
                      if r.spec.condition in ("phosphene", "segment")]
        for record in fragmented:
            sidecar = (tmp_path / "out" / record.path).with_suffix(".json")
            elements = json.loads(sidecar.read_text())
            assert len(elements) == record.element_count
            assert set(elements[0]) == {"x", "y", "orientation", "priority",
                                        "index"}

    def test_levels_give_nested_counts(self, tmp_path):
        write_source_tree(tmp_path / "src", per_category=1)
        sources = discover_sources(tmp_path / "src")[:1]
        manifest = build_dataset(sources, FAST_CONFIG, tmp_path / "out")
        for condition in ("phosphene", "segment"):
            by_level = sorted(
                (r for r in manifest.records if r.spec.condition == condition),
                key=lambda r: r.spec.level)
            counts = [r.element_count for r in by_level]
            assert counts == sorted(counts)
            assert counts[-1] == by_level[-1].n_max

    def test_red_background_exact_outside_elements(self, tmp_path):
        write_source_tree(tmp_path / "src", per_category=1)
        sources = discover_sources(tmp_path / "src")[:1]
        config = PipelineConfig(canvas=128, pixels_per_degree=16.0,
                                background=(1.0, 0.0, 0.0))
        manifest = build_dataset(sources, config, tmp_path / "out")
        record = next(r for r in manifest.records
                      if r.spec.condition == "segment" and r.spec.level == 12)
        rgb = np.asarray(Image.open(tmp_path / "out" / record.path))
        assert rgb.shape[2] == 3
        is_red = np.all(rgb == np.array([255, 0, 0]), axis=-1)
        assert is_red.mean() > 0.9  # sparse level-12 elements
        # pixels not exactly red must belong to some rendered element
        elements = json.loads(
            ((tmp_path / "out" / record.path).with_suffix(".json")).read_text())
        bad_rows, bad_cols = np.where(~is_red)
        centers = np.array([[e["x"], e["y"]] for e in elements])
        for row, col in zip(bad_rows, bad_cols):
            d = np.hypot(centers[:, 0] - col, centers[:, 1] - row)
            assert d.min() <= 8.0  # within an element footprint

    def test_contour_images_decode(self, tmp_path):
        write_source_tree(tmp_path / "src", per_category=1)
        sources = discover_sources(tmp_path / "src")[:1]
        manifest = build_dataset(sources, FAST_CONFIG, tmp_path / "out")
        record = next(r for r in manifest.records if r.spec.condition == "contour")
        image = read_gray_png(tmp_path / "out" / record.path)
        assert image.shape == (128, 128)
        assert image.max() > 0.5  # normalized contour map reaches high values

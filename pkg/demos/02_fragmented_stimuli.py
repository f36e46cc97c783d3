"""From one object to its fragmented stimuli.

Takes a synthetic background-removed source, extracts contours, places
elements greedily by contour strength, and renders the phosphene and
segment conditions at three fragmentation levels.
"""

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from contour_bench.filtering import GaborParams, OrientationBank, contour_energy
from contour_bench.images import rgb_to_gray
from contour_bench.placement import (
    PlacementConfig,
    render_elements,
    saturate_place,
    subsample,
)
from contour_bench.synth import make_source

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

rgba = make_source("pan", 0, size=256) / 255.0
gray = np.clip(rgb_to_gray(rgba[..., :3]) * rgba[..., 3], 0, 1)

cmap = contour_energy(gray, GaborParams(), OrientationBank.evenly_spaced(8))
config = PlacementConfig()
saturated = saturate_place(cmap, config)
print(f"saturated placement: N_max = {len(saturated)} elements")

levels = (12, 35, 100)
fig, axes = plt.subplots(2, len(levels) + 1, figsize=(3 * (len(levels) + 1), 6))
axes[0, 0].imshow(gray, cmap="gray")
axes[0, 0].set_title("source (grayscale)")
axes[1, 0].imshow(cmap.strength, cmap="magma")
axes[1, 0].set_title("contour strength")
for col, level in enumerate(levels, start=1):
    subset = subsample(saturated, level)
    for row, kind in enumerate(("phosphene", "segment")):
        image = render_elements(subset, kind, (256, 256), config)
        axes[row, col].imshow(image, cmap="gray", vmin=0, vmax=1)
        axes[row, col].set_title(f"{kind} {level}% ({len(subset)} elems)")
for ax in axes.ravel():
    ax.axis("off")
fig.tight_layout()
fig.savefig(out / "fragmented_conditions.png", dpi=120)
print(f"figure written to {out / 'fragmented_conditions.png'}")

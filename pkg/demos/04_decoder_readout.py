"""Model readouts: zero-shot category mapping and decoder fits.

Shows the two response channels: mapping a 1000-way classifier output
onto the 12 categories via the shipped class mapping, and fitting the
linear decoder on penultimate-layer-style activations (here synthetic
clusters). Activations travel through the ACTF container on disk.
"""

import tempfile
from pathlib import Path

import numpy as np

from contour_bench.categories import CATEGORIES
from contour_bench.readout import (
    ActivationSet,
    CategoryMapping,
    decoder_predict,
    fit_decoder,
    read_actf,
    write_actf,
    zero_shot_predict,
)

# --- zero-shot: logits -> 12 categories ---------------------------------
mapping = CategoryMapping.default()
print("12-category mapping, member ImageNet classes per label:")
for label in CATEGORIES:
    print(f"  {label:15s} {mapping.members[label]}")

rng = np.random.default_rng(0)
logits = rng.normal(size=1000)
logits[mapping.members["shovel"][0]] += 12.0  # confident shovel response
print(f"argmax category: {zero_shot_predict(logits, mapping)}")

# --- decoder fit on activations ------------------------------------------
means = rng.normal(size=(12, 64)) * 6.0
train = ActivationSet(
    values=np.concatenate([m + rng.normal(size=(10, 64)) for m in means]),
    ids=[f"train_{i}" for i in range(120)],
    labels=[c for c in CATEGORIES for _ in range(10)],
)
workdir = Path(tempfile.mkdtemp(prefix="contour_bench_demo_"))
write_actf(workdir / "train.actf", train)
restored = read_actf(workdir / "train.actf")  # the adapter's wire format

model = fit_decoder(restored)
print(f"decoder converged in {model.n_iter} iterations, "
      f"final loss {model.final_loss:.4f} (chance loss {np.log(12):.4f})")

probe = ActivationSet(
    values=np.concatenate([m + rng.normal(size=(4, 64)) for m in means]),
    labels=[c for c in CATEGORIES for _ in range(4)],
)
predictions = decoder_predict(model, probe)
accuracy = np.mean([p == t for p, t in zip(predictions, probe.labels)])
print(f"held-out accuracy on fresh draws: {accuracy:.2%} "
      f"(chance {1 / 12:.2%})")

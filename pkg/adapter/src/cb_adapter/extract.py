"""Penultimate-activation and logit extraction for torchvision models.

"Penultimate" means the input to the final classification layer
(post-pooling, pre-head). A forward hook on the last Linear module
captures it, which covers the resnet/vgg/convnext/vit/efficientnet
families; `layer` overrides the hook point by module name for
architectures where that reading is wrong.
"""

from __future__ import annotations

import difflib
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image
from torchvision import models as tv_models
from torchvision import transforms

from . import actf

IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg", ".bmp", ".webp"}

# standard ImageNet preprocessing; weights-specific transforms replace
# this when pretrained weights are requested
DEFAULT_PREPROCESS = transforms.Compose([
    transforms.Resize(256),
    transforms.CenterCrop(224),
    transforms.ToTensor(),
    transforms.Normalize(mean=[0.485, 0.456, 0.406],
                         std=[0.229, 0.224, 0.225]),
])


@dataclass
class ExtractionJob:
    model: str
    input_dir: str
    output_prefix: str
    layer: str = "penultimate"  # or a named module
    batch_size: int = 16
    weights: str = None  # e.g. "IMAGENET1K_V1"; None = random init
    device: str = "cpu"


def resolve_model(name: str, weights: str = None):
    available = sorted(tv_models.list_models())
    if name not in available:
        near = difflib.get_close_matches(name, available, n=5)
        raise ValueError(
            f"unknown model {name!r}; did you mean: {', '.join(near) or '?'}")
    model = tv_models.get_model(name, weights=weights)
    model.eval()
    preprocess = DEFAULT_PREPROCESS
    if weights is not None:
        enum = tv_models.get_model_weights(name)
        preprocess = enum[weights].transforms()
    return model, preprocess


def _find_head(model: torch.nn.Module):
    """Last Linear module in forward order; its input is 'penultimate'."""
    head_name, head = None, None
    for name, module in model.named_modules():
        if isinstance(module, torch.nn.Linear):
            head_name, head = name, module
    if head is None:
        raise ValueError("model has no Linear head to hook")
    return head_name, head


def _named_module(model: torch.nn.Module, name: str):
    modules = dict(model.named_modules())
    if name not in modules:
        near = difflib.get_close_matches(name, modules.keys(), n=5)
        raise ValueError(
            f"no module named {name!r}; close matches: {', '.join(near)}")
    return modules[name]


def list_images(input_dir) -> list:
    input_dir = Path(input_dir)
    images = [p for p in sorted(input_dir.rglob("*"))
              if p.suffix.lower() in IMAGE_EXTENSIONS]
    if not images:
        raise ValueError(f"no images under {input_dir}")
    return images


def extract(job: ExtractionJob, labels_for=None) -> dict:
    """Run the model over the directory and write the ACTF pair.

    Emits `<prefix>.actf` (penultimate features) and, when the head is
    a 1000-way classifier, `<prefix>.logits.actf`. Rows follow sorted
    filename order; zero-byte/corrupt images are skipped with a
    warning. `labels_for(relative_path)` optionally supplies category
    labels for the sidecar. Returns a summary dict.
    """
    model, preprocess = resolve_model(job.model, job.weights)
    device = torch.device(job.device)
    model.to(device)

    captured = {}
    if job.layer == "penultimate":
        _, hook_module = _find_head(model)

        def grab(module, inputs, output):
            captured["features"] = inputs[0].detach()
    else:
        hook_module = _named_module(model, job.layer)

        def grab(module, inputs, output):
            out = output.detach()
            captured["features"] = out.flatten(1) if out.ndim > 2 else out

    handle = hook_module.register_forward_hook(grab)

    images = list_images(job.input_dir)
    kept_ids, feature_rows, logit_rows = [], [], []
    base = Path(job.input_dir)
    batch, batch_ids = [], []

    def flush():
        if not batch:
            return
        stacked = torch.stack(batch).to(device)
        with torch.inference_mode():
            logits = model(stacked)
        feature_rows.append(captured["features"].cpu().numpy())
        if logits.ndim == 2 and logits.shape[1] == 1000:
            logit_rows.append(logits.cpu().numpy())
        kept_ids.extend(batch_ids)
        batch.clear()
        batch_ids.clear()

    for path in images:
        try:
            with Image.open(path) as im:
                tensor = preprocess(im.convert("RGB"))
        except Exception as err:
            warnings.warn(f"skipping {path.name}: {err}")
            continue
        batch.append(tensor)
        batch_ids.append(str(path.relative_to(base)))
        if len(batch) >= job.batch_size:
            flush()
    flush()
    handle.remove()

    if not kept_ids:
        raise ValueError("no decodable images")
    features = np.concatenate(feature_rows).astype(np.float32)
    labels = None
    if labels_for is not None:
        labels = [labels_for(i) for i in kept_ids]

    prefix = Path(job.output_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    features_path = Path(str(prefix) + ".actf")
    actf.write(features_path, features, kept_ids, labels)
    summary = {"rows": len(kept_ids), "cols": int(features.shape[1]),
               "features": str(features_path), "logits": None,
               "skipped": len(images) - len(kept_ids)}
    if logit_rows:
        logits_path = Path(str(prefix) + ".logits.actf")
        actf.write(logits_path, np.concatenate(logit_rows).astype(np.float32),
                   kept_ids, labels)
        summary["logits"] = str(logits_path)
    return summary


def manifest_labels(manifest_path):
    """Label lookup (relative stimulus path -> category) from a dataset
    manifest produced by the stimulus pipeline."""
    import json

    doc = json.loads(Path(manifest_path).read_text())
    table = {record["path"]: record["category"] for record in doc["records"]}
    return lambda rel: table.get(rel)

"""Model readouts: zero-shot 1000-class mapping and linear decoder fits.

Activation files use the little-endian "ACTF" container: magic bytes
`ACTF`, u32 version (=1), u32 rows, u32 cols, then rows*cols float32
values row-major. A `<name>.labels.json` sidecar carries stimulus ids
and optional category labels.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .categories import CATEGORIES

ACTF_MAGIC = b"ACTF"
ACTF_VERSION = 1

DEFAULT_MAPPING_RESOURCE = "imagenet_to_12.json"


# ---------------------------------------------------------------------------
# ACTF container

@dataclass
class ActivationSet:
    values: np.ndarray  # (rows, cols) float32
    ids: list = field(default_factory=list)
    labels: list = None  # per-row category, or None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.ndim != 2:
            raise ValueError("activations must be a 2D (rows, cols) array")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("activations contain non-finite values")
        if self.ids and len(self.ids) != self.values.shape[0]:
            raise ValueError("ids length does not match rows")
        if self.labels is not None and len(self.labels) != self.values.shape[0]:
            raise ValueError("labels length does not match rows")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]


def write_actf(path, activations: ActivationSet) -> None:
    path = Path(path)
    rows, cols = activations.values.shape
    with open(path, "wb") as fh:
        fh.write(ACTF_MAGIC)
        fh.write(struct.pack("<III", ACTF_VERSION, rows, cols))
        fh.write(activations.values.astype("<f4").tobytes(order="C"))
    sidecar = {
        "ids": list(activations.ids) or [str(i) for i in range(rows)],
        "labels": list(activations.labels) if activations.labels is not None else None,
    }
    _sidecar_path(path).write_text(json.dumps(sidecar))


def read_actf(path) -> ActivationSet:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != ACTF_MAGIC:
        raise ValueError(f"{path.name}: not an ACTF file")
    version, rows, cols = struct.unpack("<III", raw[4:16])
    if version != ACTF_VERSION:
        raise ValueError(f"{path.name}: unsupported ACTF version {version}")
    expected = 16 + rows * cols * 4
    if len(raw) != expected:
        raise ValueError(f"{path.name}: truncated ACTF payload")
    values = np.frombuffer(raw, dtype="<f4", offset=16).reshape(rows, cols)
    ids, labels = [str(i) for i in range(rows)], None
    sidecar = _sidecar_path(path)
    if sidecar.exists():
        doc = json.loads(sidecar.read_text())
        ids = doc.get("ids", ids)
        labels = doc.get("labels")
    return ActivationSet(values=values.copy(), ids=ids, labels=labels)


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".labels.json")


# ---------------------------------------------------------------------------
# Zero-shot readout

@dataclass
class CategoryMapping:
    """ImageNet class index (0..999) -> one of the 12 labels, or None."""

    entries: dict

    def __post_init__(self):
        members = {}
        for key, label in self.entries.items():
            index = int(key)
            if not 0 <= index < 1000:
                raise ValueError(f"mapped index {index} outside 0..999")
            if label is None:
                continue
            if label not in CATEGORIES:
                raise ValueError(f"mapped label {label!r} not in the 12-label set")
            members.setdefault(label, []).append(index)
        missing = [c for c in CATEGORIES if c not in members]
        if missing:
            raise ValueError(f"mapping covers no class for: {', '.join(missing)}")
        self.members = {label: sorted(idx) for label, idx in members.items()}

    @classmethod
    def from_json(cls, path) -> "CategoryMapping":
        return cls(json.loads(Path(path).read_text()))

    @classmethod
    def default(cls) -> "CategoryMapping":
        text = (resources.files("contour_bench") / "data"
                / DEFAULT_MAPPING_RESOURCE).read_text()
        return cls(json.loads(text))


def softmax(logits: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = logits - logits.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def zero_shot_predict(logits: np.ndarray, mapping: CategoryMapping,
                      aggregate: str = "max") -> str:
    """Map 1000-class logits onto the 12 categories.

    Each category is scored as the max (or sum) softmax probability
    over its member classes; unmapped classes are ignored. Ties break
    alphabetically.
    """
    logits = np.asarray(logits, dtype=np.float64).ravel()
    if logits.size != 1000:
        raise ValueError(f"expected 1000 logits, got {logits.size}")
    if not np.all(np.isfinite(logits)):
        raise ValueError("logits contain non-finite values")
    if aggregate not in ("max", "sum"):
        raise ValueError("aggregate must be 'max' or 'sum'")
    probs = softmax(logits)
    best_label, best_score = None, -1.0
    for label in CATEGORIES:  # alphabetical: first strict max wins ties
        member_probs = probs[mapping.members[label]]
        score = float(member_probs.max() if aggregate == "max" else member_probs.sum())
        if score > best_score:
            best_label, best_score = label, score
    return best_label


def zero_shot_predict_batch(logit_set: ActivationSet, mapping: CategoryMapping,
                            aggregate: str = "max") -> list:
    return [zero_shot_predict(row, mapping, aggregate) for row in logit_set.values]


# ---------------------------------------------------------------------------
# Linear decoder (multinomial logistic regression)

@dataclass(frozen=True)
class DecoderHyper:
    l2: float = 1e-3
    max_iter: int = 2000
    tol: float = 1e-6  # gradient max-norm stopping criterion
    standardize: bool = True


@dataclass
class DecoderModel:
    classes: tuple  # sorted category labels, one weight row each
    weights: np.ndarray  # (n_classes, cols)
    biases: np.ndarray  # (n_classes,)
    mean: np.ndarray  # per-feature standardization offset
    scale: np.ndarray  # per-feature standardization divisor (> 0)
    hyper: DecoderHyper = DecoderHyper()
    final_loss: float = 0.0
    n_iter: int = 0

    def to_json(self, path) -> None:
        doc = {
            "classes": list(self.classes),
            "weights": self.weights.tolist(),
            "biases": self.biases.tolist(),
            "mean": self.mean.tolist(),
            "scale": self.scale.tolist(),
            "hyper": {"l2": self.hyper.l2, "max_iter": self.hyper.max_iter,
                      "tol": self.hyper.tol, "standardize": self.hyper.standardize},
            "final_loss": self.final_loss,
            "n_iter": self.n_iter,
        }
        Path(path).write_text(json.dumps(doc))

    @classmethod
    def from_json(cls, path) -> "DecoderModel":
        doc = json.loads(Path(path).read_text())
        return cls(
            classes=tuple(doc["classes"]),
            weights=np.asarray(doc["weights"], dtype=np.float64),
            biases=np.asarray(doc["biases"], dtype=np.float64),
            mean=np.asarray(doc["mean"], dtype=np.float64),
            scale=np.asarray(doc["scale"], dtype=np.float64),
            hyper=DecoderHyper(**doc["hyper"]),
            final_loss=doc["final_loss"],
            n_iter=doc["n_iter"],
        )


def decoder_objective(weights: np.ndarray, biases: np.ndarray, x: np.ndarray,
                      onehot: np.ndarray, l2: float):
    """Mean cross-entropy + (l2/2)||W||^2 and its analytic gradient.

    Biases are unpenalized. Returns (loss, grad_w, grad_b).
    """
    n = x.shape[0]
    scores = x @ weights.T + biases
    log_probs = scores - _logsumexp(scores)
    loss = -np.sum(onehot * log_probs) / n + 0.5 * l2 * np.sum(weights ** 2)
    probs = np.exp(log_probs)
    delta = (probs - onehot) / n
    grad_w = delta.T @ x + l2 * weights
    grad_b = delta.sum(axis=0)
    return loss, grad_w, grad_b


def _logsumexp(scores: np.ndarray) -> np.ndarray:
    peak = scores.max(axis=1, keepdims=True)
    return peak + np.log(np.exp(scores - peak).sum(axis=1, keepdims=True))


def fit_decoder(train: ActivationSet, hyper: DecoderHyper = DecoderHyper()) -> DecoderModel:
    """Fit the 12-way linear decoder on labeled activations.

    Deterministic full-batch gradient descent with Armijo backtracking
    from zero initialization; the loss is non-increasing across
    accepted steps and optimization stops at the gradient tolerance or
    the iteration cap.
    """
    if train.labels is None:
        raise ValueError("training activations need labels")
    classes = tuple(sorted(set(CATEGORIES)))
    present = set(train.labels)
    missing = [c for c in classes if c not in present]
    if missing:
        raise ValueError("incomplete label coverage: missing "
                         + ", ".join(missing))
    unknown = sorted(present - set(classes))
    if unknown:
        raise ValueError(f"labels outside the 12-label set: {unknown}")
    if train.rows < 2 * len(classes):
        raise ValueError(f"need at least {2 * len(classes)} training rows")

    x = train.values.astype(np.float64)
    if hyper.standardize:
        mean = x.mean(axis=0)
        scale = x.std(axis=0)
        scale[scale == 0] = 1.0  # zero-variance features pass through
    else:
        mean = np.zeros(x.shape[1])
        scale = np.ones(x.shape[1])
    x = (x - mean) / scale

    label_index = {c: i for i, c in enumerate(classes)}
    onehot = np.zeros((train.rows, len(classes)))
    onehot[np.arange(train.rows), [label_index[l] for l in train.labels]] = 1.0

    weights = np.zeros((len(classes), x.shape[1]))
    biases = np.zeros(len(classes))
    loss, grad_w, grad_b = decoder_objective(weights, biases, x, onehot, hyper.l2)
    step = 1.0
    iterations = 0
    for iterations in range(1, hyper.max_iter + 1):
        grad_norm = max(np.abs(grad_w).max(), np.abs(grad_b).max())
        if grad_norm <= hyper.tol:
            iterations -= 1
            break
        grad_sq = np.sum(grad_w ** 2) + np.sum(grad_b ** 2)
        step = min(step * 2.0, 1e4)  # allow recovery after conservative steps
        while True:
            new_w = weights - step * grad_w
            new_b = biases - step * grad_b
            new_loss, new_gw, new_gb = decoder_objective(
                new_w, new_b, x, onehot, hyper.l2)
            if new_loss <= loss - 1e-4 * step * grad_sq:
                break
            step *= 0.5
            if step < 1e-12:
                new_w, new_b = weights, biases
                new_loss, new_gw, new_gb = loss, grad_w, grad_b
                break
        if new_loss >= loss and step < 1e-12:
            break  # no descent direction left at float precision
        weights, biases = new_w, new_b
        loss, grad_w, grad_b = new_loss, new_gw, new_gb

    return DecoderModel(classes=classes, weights=weights, biases=biases,
                        mean=mean, scale=scale, hyper=hyper,
                        final_loss=float(loss), n_iter=iterations)


def decoder_predict(model: DecoderModel, activations: ActivationSet) -> list:
    """Argmax affine scores on standardized features; ties alphabetical."""
    x = activations.values.astype(np.float64)
    if x.shape[1] != model.weights.shape[1]:
        raise ValueError(
            f"feature dimension {x.shape[1]} does not match decoder "
            f"{model.weights.shape[1]}")
    x = (x - model.mean) / model.scale
    scores = x @ model.weights.T + model.biases
    # classes are sorted, so the first maximal index is the
    # alphabetically first label
    winners = scores.argmax(axis=1)
    return [model.classes[i] for i in winners]

"""Writer/reader for the ACTF activation container.

Wire format (little-endian): magic `ACTF`, u32 version=1, u32 rows,
u32 cols, then rows*cols float32 row-major. A `<name>.labels.json`
sidecar carries `{ids: [...], labels: [...]|null}`. This implements
the format independently of the consumer package; the bytes are the
interface.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"ACTF"
VERSION = 1


def write(path, values: np.ndarray, ids, labels=None) -> None:
    values = np.ascontiguousarray(values, dtype="<f4")
    if values.ndim != 2:
        raise ValueError("ACTF payload must be 2D (rows, cols)")
    rows, cols = values.shape
    if len(ids) != rows:
        raise ValueError("ids length must match rows")
    if labels is not None and len(labels) != rows:
        raise ValueError("labels length must match rows")
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, rows, cols))
        fh.write(values.tobytes(order="C"))
    sidecar = {"ids": list(ids),
               "labels": list(labels) if labels is not None else None}
    sidecar_path(path).write_text(json.dumps(sidecar))


def read(path):
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path.name}: not an ACTF file")
    version, rows, cols = struct.unpack("<III", raw[4:16])
    if version != VERSION:
        raise ValueError(f"{path.name}: unsupported version {version}")
    if len(raw) != 16 + rows * cols * 4:
        raise ValueError(f"{path.name}: truncated payload")
    values = np.frombuffer(raw, dtype="<f4", offset=16).reshape(rows, cols)
    ids, labels = None, None
    side = sidecar_path(path)
    if side.exists():
        doc = json.loads(side.read_text())
        ids, labels = doc.get("ids"), doc.get("labels")
    return values.copy(), ids, labels


def sidecar_path(path: Path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".labels.json")

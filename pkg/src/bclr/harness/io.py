"""File formats: binary image stacks, numeric CSV and versioned JSON summaries.

Image stack layout: the 8 magic bytes ``BCLR-IS1``, three little-endian
uint32 (n, rows, cols), then ``n * rows * cols`` little-endian float64
values, frame-major and row-major within a frame.
"""

from __future__ import annotations

import csv
import json
import math
import struct
from pathlib import Path

import numpy as np

__all__ = [
    "MAGIC",
    "SCHEMA",
    "write_image_stack",
    "read_image_stack",
    "is_image_stack",
    "write_csv",
    "read_csv",
    "write_json",
    "jsonable",
]

MAGIC = b"BCLR-IS1"
SCHEMA = "bclr/1"
_HEADER = struct.Struct("<8sIII")


def write_image_stack(path, frames) -> None:
    a = np.asarray(frames, dtype="<f8")
    if a.ndim != 3 or 0 in a.shape:
        raise ValueError("image stack must be a non-empty (n, rows, cols) array")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, *a.shape))
        fh.write(np.ascontiguousarray(a).tobytes())


def is_image_stack(path) -> bool:
    with open(path, "rb") as fh:
        return fh.read(len(MAGIC)) == MAGIC


def read_image_stack(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size or raw[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a BCLR-IS1 image stack")
    _, n, rows, cols = _HEADER.unpack_from(raw)
    expected = _HEADER.size + 8 * n * rows * cols
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for {n}x{rows}x{cols}, found {len(raw)}")
    return np.frombuffer(raw, dtype="<f8", offset=_HEADER.size).reshape(n, rows, cols).astype(np.float64)


def write_csv(path, rows, header=None) -> None:
    a = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if header is not None:
            w.writerow(header)
        for r in a:
            w.writerow([repr(float(v)) for v in r])


def read_csv(path):
    """Numeric CSV with an optional header row; returns ``(values, header or None)``."""
    with open(path, newline="") as fh:
        lines = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not lines:
        raise ValueError(f"{path}: empty CSV")
    header = None
    try:
        [float(c) for c in lines[0]]
    except ValueError:
        header, lines = lines[0], lines[1:]
    width = len(header) if header else len(lines[0])
    out = np.empty((len(lines), width))
    for i, r in enumerate(lines):
        if len(r) != width:
            raise ValueError(f"{path}: line {i + 1 + (header is not None)} has {len(r)} fields, expected {width}")
        try:
            out[i] = [float(c) for c in r]
        except ValueError as exc:
            raise ValueError(f"{path}: line {i + 1 + (header is not None)}: {exc}") from None
    return out, header


def jsonable(obj):
    """Recursively convert numpy values; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, payload: dict) -> str:
    """Serialize with the ``"schema"`` key first; writes to ``path`` unless it is None or "-"."""
    text = json.dumps({"schema": SCHEMA, **jsonable(payload)}, indent=2)
    if path not in (None, "-"):
        Path(path).write_text(text + "\n")
    return text

"""Deterministic JSON output, hashing and the binary matrix container."""

from __future__ import annotations

import hashlib
import json
import math
import struct
from pathlib import Path

import numpy as np

MAGIC = b"DIRACMAT"
SIGNIFICANT_DIGITS = 12


def normalize(obj):
    """Convert numpy types and round floats to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): normalize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [normalize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return normalize(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{SIGNIFICANT_DIGITS}g}")
    return obj


def dumps(obj) -> str:
    return json.dumps(normalize(obj), sort_keys=True, indent=2) + "\n"


def hash_of(obj) -> str:
    return hashlib.sha256(json.dumps(normalize(obj), sort_keys=True).encode()).hexdigest()


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj))
    return path


def write_container(path, array, params: dict | None = None) -> Path:
    """Write a complex matrix or kernel table.

    Layout: 8-byte magic, little-endian uint32 header length, UTF-8 JSON
    header (``dims``, ``dtype``, ``order``, ``params``, ``params_hash``),
    then the payload as little-endian complex64 in row-major order.
    """
    arr = np.ascontiguousarray(np.asarray(array), dtype="<c8")
    header = {
        "dims": list(arr.shape),
        "dtype": "complex64",
        "endianness": "little",
        "order": "row-major",
        "params": normalize(params or {}),
        "params_hash": hash_of(params or {}),
    }
    blob = json.dumps(header, sort_keys=True).encode()
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(arr.tobytes(order="C"))
    return path


def read_container(path) -> tuple[np.ndarray, dict]:
    data = Path(path).read_bytes()
    if data[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path} is not a matrix container")
    (size,) = struct.unpack("<I", data[len(MAGIC) : len(MAGIC) + 4])
    start = len(MAGIC) + 4
    header = json.loads(data[start : start + size])
    arr = np.frombuffer(data[start + size :], dtype="<c8").reshape(header["dims"])
    return arr, header

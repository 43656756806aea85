"""Single-file checkpoint container.

Layout: an 8-byte little-endian unsigned length, a UTF-8 JSON header of that
length, then the raw tensor payloads back to back. The header carries a format
version, a caller-supplied manifest (config echo, step counters, anything
JSON-serializable), and a table of tensor records (name, shape, dtype,
offset). Payloads are little-endian float32 unless a tensor was saved as
float64, which the record notes. Tensor records are sorted by name so the
same state always produces the same bytes.
"""
from __future__ import annotations

import json
import struct
from pathlib import Path
from typing import Mapping

import numpy as np

from ..errors import CheckpointError

FORMAT_VERSION = 1

_DTYPES = {"f4": "<f4", "f8": "<f8"}


def save_checkpoint(
    path: str | Path,
    arrays: Mapping[str, np.ndarray],
    manifest: Mapping | None = None,
) -> None:
    records = []
    chunks = []
    offset = 0
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        code = "f8" if arr.dtype == np.float64 else "f4"
        raw = arr.astype(_DTYPES[code]).tobytes()
        records.append(
            {
                "name": name,
                "shape": list(arr.shape),
                "dtype": code,
                "offset": offset,
                "nbytes": len(raw),
            }
        )
        chunks.append(raw)
        offset += len(raw)
    header = {
        "format_version": FORMAT_VERSION,
        "manifest": dict(manifest or {}),
        "tensors": records,
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "wb") as f:
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        for raw in chunks:
            f.write(raw)
    tmp.replace(path)


def load_checkpoint(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}")
    data = path.read_bytes()
    if len(data) < 8:
        raise CheckpointError(f"checkpoint truncated: {path}")
    (hlen,) = struct.unpack("<Q", data[:8])
    if len(data) < 8 + hlen:
        raise CheckpointError(f"checkpoint header truncated: {path}")
    try:
        header = json.loads(data[8 : 8 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointError(f"checkpoint header unreadable: {path}") from e
    version = header.get("format_version")
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint format_version {version!r}, "
            f"expected {FORMAT_VERSION}"
        )
    base = 8 + hlen
    arrays: dict[str, np.ndarray] = {}
    for rec in header["tensors"]:
        lo = base + rec["offset"]
        hi = lo + rec["nbytes"]
        if hi > len(data):
            raise CheckpointError(
                f"checkpoint payload truncated at tensor {rec['name']!r}: {path}"
            )
        arr = np.frombuffer(data[lo:hi], dtype=_DTYPES[rec["dtype"]])
        arrays[rec["name"]] = arr.reshape(rec["shape"]).copy()
    return arrays, header["manifest"]

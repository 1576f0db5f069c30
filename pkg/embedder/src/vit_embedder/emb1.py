"""Writer for the EMB1 vector interchange format.

Layout (integers little-endian): magic b"EMB1", version byte 0x01,
dim uint32, count uint64; per record a uint16 id length, the UTF-8 id
bytes, then dim float32 values. Vectors must be unit length within 1e-4.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"EMB1"
VERSION = 1
NORM_TOLERANCE = 1e-4

_HEADER = struct.Struct("<4sBIQ")
_ID_LEN = struct.Struct("<H")


class Emb1Error(Exception):
    """Vector batch violates the EMB1 contract."""


def write_emb1(entries: list[tuple[str, np.ndarray]], dim: int, path: Path | str) -> None:
    seen: set[str] = set()
    for item_id, vector in entries:
        if item_id in seen:
            raise Emb1Error(f"duplicate item_id {item_id!r}")
        seen.add(item_id)
        if vector.shape != (dim,):
            raise Emb1Error(f"vector for {item_id!r} has shape {vector.shape}, expected ({dim},)")
        norm = float(np.sqrt(np.dot(vector.astype(np.float64), vector.astype(np.float64))))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise Emb1Error(f"vector for {item_id!r} has norm {norm}, expected 1")
    with Path(path).open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, dim, len(entries)))
        for item_id, vector in entries:
            id_bytes = item_id.encode("utf-8")
            fh.write(_ID_LEN.pack(len(id_bytes)))
            fh.write(id_bytes)
            fh.write(np.ascontiguousarray(vector, dtype="<f4").tobytes())

"""Unit-norm embedding vectors and the EMB1 binary interchange format.

EMB1 layout (all integers little-endian):

    magic    4 bytes   b"EMB1"
    version  1 byte    0x01
    dim      uint32
    count    uint64
    then, per record:
        id_len   uint16
        id       id_len bytes, UTF-8
        values   dim * float32

Vectors are unit length by contract. The writer refuses batches that are
not normalized and the reader rejects records whose Euclidean norm
deviates from 1 by more than NORM_FILE_TOLERANCE (loose, to absorb float
noise from external embedders); vectors produced in-process are held to
NORM_INTERNAL_TOLERANCE.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmbedError, FormatError, NormalizationError

MAGIC = b"EMB1"
VERSION = 1
HEADER_SIZE = 4 + 1 + 4 + 8

NORM_FILE_TOLERANCE = 1e-4
NORM_INTERNAL_TOLERANCE = 1e-6

_HEADER = struct.Struct("<4sBIQ")
_ID_LEN = struct.Struct("<H")
_BLOCK_COUNTER = struct.Struct("<I")


def vector_norm(values: np.ndarray) -> float:
    """Euclidean norm, accumulated in float64 regardless of input dtype."""
    arr = np.asarray(values, dtype=np.float64)
    return float(np.sqrt(np.dot(arr, arr)))


def normalize(values) -> np.ndarray:
    """Scale a finite float sequence to unit Euclidean length.

    Returns a float32 vector whose norm is 1 within NORM_INTERNAL_TOLERANCE.
    Raises NormalizationError for empty, non-finite, or all-zero input.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise NormalizationError("expected a non-empty 1-D float sequence")
    if not np.all(np.isfinite(arr)):
        raise NormalizationError("input contains non-finite values")
    norm = float(np.sqrt(np.dot(arr, arr)))
    if norm == 0.0:
        raise NormalizationError("cannot normalize the zero vector")
    return (arr / norm).astype(np.float32)


def check_unit_norm(values: np.ndarray, tolerance: float, context: str = "") -> None:
    """Raise NormalizationError unless the norm is within tolerance of 1."""
    deviation = abs(vector_norm(values) - 1.0)
    if deviation > tolerance:
        where = f" ({context})" if context else ""
        raise NormalizationError(
            f"vector norm deviates from 1 by {deviation:.3e} > {tolerance:.0e}{where}"
        )


@dataclass
class EmbeddingBatch:
    """Ordered (item_id, vector) pairs sharing one dimensionality."""

    dim: int
    entries: list[tuple[str, np.ndarray]] = field(default_factory=list)

    def validate(self) -> None:
        if self.dim < 1:
            raise FormatError(f"dim must be positive, got {self.dim}")
        seen: set[str] = set()
        for item_id, vector in self.entries:
            if item_id in seen:
                raise FormatError(f"duplicate item_id {item_id!r} in batch")
            seen.add(item_id)
            if vector.shape != (self.dim,):
                raise FormatError(
                    f"vector for {item_id!r} has shape {vector.shape}, expected ({self.dim},)"
                )
            check_unit_norm(vector, NORM_FILE_TOLERANCE, context=item_id)

    def as_dict(self) -> dict[str, np.ndarray]:
        return {item_id: vector for item_id, vector in self.entries}


def write_embedding_file(batch: EmbeddingBatch, path: Path | str) -> None:
    """Serialize a validated batch to an EMB1 file (bit-exact roundtrip)."""
    batch.validate()
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, batch.dim, len(batch.entries)))
        for item_id, vector in batch.entries:
            id_bytes = item_id.encode("utf-8")
            if len(id_bytes) > 0xFFFF:
                raise FormatError(f"item_id longer than 65535 bytes: {item_id[:40]!r}...")
            fh.write(_ID_LEN.pack(len(id_bytes)))
            fh.write(id_bytes)
            fh.write(np.ascontiguousarray(vector, dtype="<f4").tobytes())


def read_embedding_file(path: Path | str) -> EmbeddingBatch:
    """Parse an EMB1 file, rejecting bad magic/version, truncation, and off-norm records."""
    data = Path(path).read_bytes()
    if len(data) < HEADER_SIZE:
        raise FormatError(f"file shorter than the {HEADER_SIZE}-byte header")
    magic, version, dim, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}, expected {VERSION}")
    if dim < 1:
        raise FormatError(f"dim must be positive, got {dim}")

    offset = HEADER_SIZE
    vector_bytes = 4 * dim
    entries: list[tuple[str, np.ndarray]] = []
    for record in range(count):
        if offset + 2 > len(data):
            raise FormatError(f"truncated record {record}: missing id length")
        (id_len,) = _ID_LEN.unpack_from(data, offset)
        offset += 2
        if offset + id_len + vector_bytes > len(data):
            raise FormatError(f"truncated record {record}")
        item_id = data[offset : offset + id_len].decode("utf-8")
        offset += id_len
        vector = np.frombuffer(data, dtype="<f4", count=dim, offset=offset).copy()
        offset += vector_bytes
        deviation = abs(vector_norm(vector) - 1.0)
        if deviation > NORM_FILE_TOLERANCE:
            raise NormalizationError(
                f"record {item_id!r}: norm deviates from 1 by {deviation:.3e}"
            )
        entries.append((item_id, vector))
    if offset != len(data):
        raise FormatError(f"{len(data) - offset} trailing bytes after {count} records")

    batch = EmbeddingBatch(dim=dim, entries=entries)
    batch.validate()
    return batch


def reference_embed(image_bytes: bytes, dim: int = 768) -> np.ndarray:
    """Deterministic stand-in embedder: SHA-256 counter stream, then normalize.

    seed = SHA-256(image_bytes); block_i = SHA-256(seed || uint32_le(i));
    each block yields four values: consecutive 8-byte little-endian unsigned
    integers u mapped to (u / 2**64) * 2 - 1 in [-1, 1). The first `dim`
    values are normalized. Identical across runs and platforms.
    """
    if not image_bytes:
        raise EmbedError("cannot embed empty input")
    if dim < 1:
        raise EmbedError(f"dim must be positive, got {dim}")
    seed = hashlib.sha256(image_bytes).digest()
    raw = np.empty(dim, dtype=np.float64)
    filled = 0
    block_index = 0
    while filled < dim:
        block = hashlib.sha256(seed + _BLOCK_COUNTER.pack(block_index)).digest()
        for off in range(0, 32, 8):
            if filled == dim:
                break
            u = int.from_bytes(block[off : off + 8], "little")
            raw[filled] = (u / 2**64) * 2.0 - 1.0
            filled += 1
        block_index += 1
    return normalize(raw)


def read_manifest_tsv(path: Path | str) -> list[tuple[str, Path]]:
    """Read an embedder manifest: one `item_id TAB file-path` per line, no header."""
    items: list[tuple[str, Path]] = []
    seen: set[str] = set()
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        for number, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            columns = line.split("\t")
            if len(columns) != 2:
                raise FormatError(f"manifest row {number}: expected 2 columns, got {len(columns)}")
            item_id, file_path = columns
            if not item_id:
                raise FormatError(f"manifest row {number}: empty item_id")
            if item_id in seen:
                raise FormatError(f"manifest row {number}: duplicate item_id {item_id!r}")
            seen.add(item_id)
            items.append((item_id, Path(file_path)))
    return items

"""Batch embedding of image manifests into EMB1 files.

Undecodable images never abort a job: they are recorded in the skip
report and the remaining manifest is processed in order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .emb1 import write_emb1
from .model import DEFAULT_MODEL_ID, ModelError, encode_cls, load_model
from .preprocess import ImageDecodeError, load_pixel_values


class ManifestError(Exception):
    """Malformed manifest TSV."""


@dataclass(frozen=True)
class EmbedJob:
    manifest: list[tuple[str, Path]]
    model_id: str = DEFAULT_MODEL_ID
    dim: int = 768
    batch_size: int = 8


@dataclass
class EmbedResult:
    out_path: Path
    embedded: int
    skipped: list[tuple[str, str]] = field(default_factory=list)


def read_manifest_tsv(path: Path | str) -> list[tuple[str, Path]]:
    """Manifest rows: `item_id TAB file-path`, no header, ids unique."""
    items: list[tuple[str, Path]] = []
    seen: set[str] = set()
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        for number, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            columns = line.split("\t")
            if len(columns) != 2:
                raise ManifestError(f"row {number}: expected 2 columns, got {len(columns)}")
            item_id, file_path = columns
            if not item_id:
                raise ManifestError(f"row {number}: empty item_id")
            if item_id in seen:
                raise ManifestError(f"row {number}: duplicate item_id {item_id!r}")
            seen.add(item_id)
            items.append((item_id, Path(file_path)))
    return items


def embed_manifest(job: EmbedJob, out_path: Path | str) -> EmbedResult:
    """Encode every readable manifest image and write the EMB1 file.

    Output order follows the manifest. The model's hidden size must match
    job.dim (768 for ViT-base).
    """
    out_path = Path(out_path)
    model = load_model(job.model_id)
    hidden = int(model.config.hidden_size)
    if hidden != job.dim:
        raise ModelError(f"model hidden size {hidden} != requested dim {job.dim}")

    decoded: list[tuple[str, torch.Tensor]] = []
    skipped: list[tuple[str, str]] = []
    for item_id, path in job.manifest:
        try:
            decoded.append((item_id, load_pixel_values(path)))
        except (ImageDecodeError, OSError) as exc:
            skipped.append((item_id, str(exc)))

    entries: list[tuple[str, np.ndarray]] = []
    for start in range(0, len(decoded), job.batch_size):
        chunk = decoded[start : start + job.batch_size]
        batch = torch.stack([tensor for _, tensor in chunk])
        vectors = encode_cls(model, batch)
        entries.extend((item_id, vectors[i]) for i, (item_id, _) in enumerate(chunk))

    write_emb1(entries, job.dim, out_path)
    return EmbedResult(out_path=out_path, embedded=len(entries), skipped=skipped)

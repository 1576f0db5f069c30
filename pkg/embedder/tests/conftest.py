"""Tiny deterministic test images."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

OFFLINE_MODEL = "random:1234"


def make_image(path: Path, seed: int, size: tuple[int, int] = (32, 24)) -> Path:
    rng = np.random.default_rng(seed)
    pixels = rng.integers(0, 256, size=(size[1], size[0], 3), dtype=np.uint8)
    Image.fromarray(pixels, mode="RGB").save(path)
    return path


def write_manifest(path: Path, items: list[tuple[str, Path]]) -> Path:
    path.write_text(
        "".join(f"{item_id}\t{file_path}\n" for item_id, file_path in items),
        encoding="utf-8",
    )
    return path

"""Image preprocessing matching the ViT checkpoint's published configuration.

The google/vit-base-patch16-224-in21k processor resizes straight to
224x224 with bilinear resampling (no crop), rescales by 1/255, and
normalizes each channel with mean 0.5 and std 0.5. Implemented directly so
no processor download is needed.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image

RESOLUTION = 224
MEAN = 0.5
STD = 0.5


class ImageDecodeError(Exception):
    """The file could not be decoded as an image."""


def load_pixel_values(path: Path | str) -> torch.Tensor:
    """Decode, resize, and normalize one image to a (3, 224, 224) tensor."""
    try:
        with Image.open(path) as img:
            rgb = img.convert("RGB").resize((RESOLUTION, RESOLUTION), Image.BILINEAR)
    except Exception as exc:
        raise ImageDecodeError(f"{path}: {exc}") from exc
    array = np.asarray(rgb, dtype=np.float32) / 255.0
    array = (array - MEAN) / STD
    return torch.from_numpy(array.transpose(2, 0, 1))

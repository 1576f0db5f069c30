"""ViT encoder wrapper: loads a checkpoint and extracts final-layer CLS vectors."""

from __future__ import annotations

import numpy as np
import torch
from transformers import ViTConfig, ViTModel

DEFAULT_MODEL_ID = "google/vit-base-patch16-224-in21k"
RANDOM_PREFIX = "random:"


class ModelError(Exception):
    """Checkpoint unavailable or incompatible with the requested job."""


def load_model(model_id: str = DEFAULT_MODEL_ID) -> ViTModel:
    """Load the encoder.

    `random:<seed>` builds the same ViT-base architecture with seeded
    random weights instead of downloading a checkpoint; embeddings are
    then deterministic but carry no semantics. Useful for offline
    environments and tests.
    """
    if model_id.startswith(RANDOM_PREFIX):
        try:
            seed = int(model_id[len(RANDOM_PREFIX):])
        except ValueError:
            raise ModelError(f"random model id needs an integer seed, got {model_id!r}") from None
        torch.manual_seed(seed)
        model = ViTModel(ViTConfig())
    else:
        try:
            model = ViTModel.from_pretrained(model_id)
        except Exception as exc:
            raise ModelError(
                f"cannot load checkpoint {model_id!r} (offline? try random:<seed>): {exc}"
            ) from exc
    model.eval()
    return model


def encode_cls(model: ViTModel, pixel_values: torch.Tensor) -> np.ndarray:
    """Final-transformer-layer CLS representations, unit-normalized, float32.

    pixel_values: (batch, 3, 224, 224). Returns (batch, hidden) rows each
    scaled to unit Euclidean length.
    """
    with torch.no_grad():
        output = model(pixel_values=pixel_values)
    cls = output.last_hidden_state[:, 0, :].to(torch.float64).numpy()
    norms = np.sqrt((cls * cls).sum(axis=1, keepdims=True))
    if np.any(norms == 0.0):
        raise ModelError("encoder produced a zero CLS vector")
    return (cls / norms).astype(np.float32)

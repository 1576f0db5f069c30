"""Vision-transformer CLS embeddings for image manifests, in EMB1 format."""

from .embedder import EmbedJob, EmbedResult, embed_manifest, read_manifest_tsv
from .model import DEFAULT_MODEL_ID, load_model

__all__ = [
    "DEFAULT_MODEL_ID",
    "EmbedJob",
    "EmbedResult",
    "embed_manifest",
    "load_model",
    "read_manifest_tsv",
]

"""Offline meme identification against template exemplars, with KG context.

Pipeline stages: ingest platform exports into a local data lake, embed
images as unit-norm vectors, match them against per-template exemplars in
an exact flat index, classify at a cosine threshold, then report
prevalence, popularity, and knowledge-graph context cards.
"""

from .analytics import (
    CommunityStats,
    PopularityEntry,
    community_stats,
    cross_platform_overlap,
    meme_image_ratio,
    popularity,
)
from .embedding import (
    EmbeddingBatch,
    normalize,
    read_embedding_file,
    reference_embed,
    write_embedding_file,
)
from .evaluation import (
    LabeledExample,
    SweepPoint,
    confusion,
    default_grid,
    select_threshold,
    sweep,
)
from .index import (
    Classification,
    FlatIndex,
    MatchResult,
    TemplateExemplar,
    best_template,
    build_index,
    classify,
    load_index_files,
    query_topk,
)
from .ingest import (
    CanonicalPost,
    ImageObject,
    LakeManifest,
    RecordError,
    load_to_lake,
    normalize_timestamp,
    parse_discord_export,
    parse_reddit_export,
    transform_filter_images,
)
from .kg import ContextCard, MemeKg, context_card, instances_of, load_kg_tsv, media_frame_of, templates
from .pipeline import MatchRecord, join_posts_matches, run_classification

__all__ = [
    "CanonicalPost",
    "Classification",
    "CommunityStats",
    "ContextCard",
    "EmbeddingBatch",
    "FlatIndex",
    "ImageObject",
    "LabeledExample",
    "LakeManifest",
    "MatchRecord",
    "MatchResult",
    "MemeKg",
    "PopularityEntry",
    "RecordError",
    "SweepPoint",
    "TemplateExemplar",
    "best_template",
    "build_index",
    "classify",
    "community_stats",
    "confusion",
    "context_card",
    "cross_platform_overlap",
    "default_grid",
    "instances_of",
    "join_posts_matches",
    "load_index_files",
    "load_kg_tsv",
    "load_to_lake",
    "media_frame_of",
    "meme_image_ratio",
    "normalize",
    "normalize_timestamp",
    "parse_discord_export",
    "parse_reddit_export",
    "popularity",
    "query_topk",
    "read_embedding_file",
    "reference_embed",
    "run_classification",
    "select_threshold",
    "sweep",
    "templates",
    "transform_filter_images",
    "write_embedding_file",
]

"""Classify every image post in a lake against a built index.

Fails closed: if any image post lacks an embedding the whole run aborts
with a CoverageError, because prevalence ratios need exact denominators.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .embedding import read_embedding_file
from .errors import CoverageError, FormatError, JoinError, QueryError
from .index import FlatIndex, classify
from .ingest import CanonicalPost, iter_lake_posts, lake_image_ids

_MATCH_KEYS = (
    "post_id",
    "item_id",
    "platform",
    "community",
    "template_id",
    "score",
    "is_meme",
    "threshold",
)


@dataclass(frozen=True)
class MatchRecord:
    """Best-template decision for one image post."""

    post_id: str
    item_id: str
    platform: str
    community: str
    template_id: str
    score: float
    is_meme: bool
    threshold: float

    def to_json_dict(self) -> dict:
        return {key: getattr(self, key) for key in _MATCH_KEYS}

    @classmethod
    def from_json_dict(cls, data: dict) -> "MatchRecord":
        return cls(**{key: data[key] for key in _MATCH_KEYS})


def run_classification(
    lake_root: Path | str, embeddings_path: Path | str, index: FlatIndex, t: float
) -> list[MatchRecord]:
    """One MatchRecord per image post, sorted by post_id.

    An image post is a post whose image_ref resolves to a stored lake
    image. Missing embeddings abort the run with CoverageError listing
    every missing id.
    """
    batch = read_embedding_file(embeddings_path)
    if batch.dim != index.dim:
        raise QueryError(f"embeddings dim {batch.dim} != index dim {index.dim}")
    vectors = batch.as_dict()

    stored = lake_image_ids(lake_root)
    image_posts = [
        post
        for post in iter_lake_posts(lake_root)
        if post.image_ref is not None and post.image_ref in stored
    ]
    missing = sorted({p.image_ref for p in image_posts if p.image_ref not in vectors})
    if missing:
        raise CoverageError(
            f"{len(missing)} image post(s) lack embeddings: {', '.join(missing[:5])}"
            + ("..." if len(missing) > 5 else ""),
            missing_ids=missing,
        )

    records = []
    for post in image_posts:
        decision = classify(index, vectors[post.image_ref], t, item_id=post.image_ref)
        records.append(
            MatchRecord(
                post_id=post.post_id,
                item_id=post.image_ref,
                platform=post.platform,
                community=post.community,
                template_id=decision.best.template_id,
                score=decision.best.score,
                is_meme=decision.is_meme,
                threshold=t,
            )
        )
    records.sort(key=lambda r: r.post_id)
    return records


def write_matches(records: list[MatchRecord], path: Path | str) -> None:
    """Write matches.jsonl: one record per line, keys in fixed order."""
    ordered = sorted(records, key=lambda r: r.post_id)
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in ordered:
            fh.write(json.dumps(record.to_json_dict(), ensure_ascii=False) + "\n")


def read_matches(path: Path | str) -> list[MatchRecord]:
    records: list[MatchRecord] = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for number, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(MatchRecord.from_json_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise FormatError(f"matches line {number}: {exc}") from None
    return records


def join_posts_matches(
    posts: list[CanonicalPost], matches: list[MatchRecord]
) -> list[tuple[CanonicalPost, MatchRecord]]:
    """Inner join on post_id, sorted; duplicate match ids are a JoinError."""
    by_id: dict[str, MatchRecord] = {}
    for match in matches:
        if match.post_id in by_id:
            raise JoinError(f"duplicate post_id in matches: {match.post_id!r}")
        by_id[match.post_id] = match
    pairs = [(post, by_id[post.post_id]) for post in posts if post.post_id in by_id]
    pairs.sort(key=lambda pair: pair[0].post_id)
    return pairs

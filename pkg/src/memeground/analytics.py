"""Per-community prevalence, template popularity, and cross-platform overlap.

The meme-to-image ratio (MIR) is truncated, not rounded, to two decimals:
truncation is the only semantics that reproduces every published ratio
from its raw counts.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .errors import JoinError, ParameterError
from .ingest import CanonicalPost
from .pipeline import MatchRecord

TOTAL_COMMUNITY = "Total"


@dataclass(frozen=True)
class CommunityStats:
    platform: str
    community: str
    posts: int
    image_posts: int
    meme_posts: int
    mir: str


@dataclass(frozen=True)
class PopularityEntry:
    template_id: str
    platform: str
    occurrence_count: int
    rank: int


def meme_image_ratio(meme_posts: int, image_posts: int) -> str:
    """meme_posts / image_posts, truncated (floored) to two decimals."""
    if image_posts == 0:
        return "0.00"
    hundredths = (100 * meme_posts) // image_posts
    return f"{hundredths // 100}.{hundredths % 100:02d}"


def community_stats(
    posts: list[CanonicalPost], matches: list[MatchRecord]
) -> list[CommunityStats]:
    """One row per (platform, community) plus a Total row per platform.

    Image posts are the posts with a match record; meme posts are those
    whose record says is_meme.
    """
    matched: dict[str, MatchRecord] = {}
    for match in matches:
        if match.post_id in matched:
            raise JoinError(f"duplicate post_id in matches: {match.post_id!r}")
        matched[match.post_id] = match

    counts: dict[tuple[str, str], list[int]] = {}
    for post in posts:
        row = counts.setdefault((post.platform, post.community), [0, 0, 0])
        row[0] += 1
        match = matched.get(post.post_id)
        if match is not None:
            row[1] += 1
            if match.is_meme:
                row[2] += 1

    rows: list[CommunityStats] = []
    for platform in sorted({key[0] for key in counts}):
        total = [0, 0, 0]
        for (p, community), (n_posts, n_images, n_memes) in sorted(counts.items()):
            if p != platform:
                continue
            rows.append(
                CommunityStats(
                    platform=platform,
                    community=community,
                    posts=n_posts,
                    image_posts=n_images,
                    meme_posts=n_memes,
                    mir=meme_image_ratio(n_memes, n_images),
                )
            )
            total[0] += n_posts
            total[1] += n_images
            total[2] += n_memes
        rows.append(
            CommunityStats(
                platform=platform,
                community=TOTAL_COMMUNITY,
                posts=total[0],
                image_posts=total[1],
                meme_posts=total[2],
                mir=meme_image_ratio(total[2], total[1]),
            )
        )
    return rows


def popularity(matches: list[MatchRecord], platform: str, top_n: int) -> list[PopularityEntry]:
    """Top templates by meme-post occurrence count on one platform.

    Ordering is count descending with lexicographic template_id tie-break;
    ranks are dense positions 1..n.
    """
    if top_n < 1:
        raise ParameterError(f"top_n must be a positive integer, got {top_n}")
    occurrences = Counter(
        m.template_id for m in matches if m.is_meme and m.platform == platform
    )
    ordered = sorted(occurrences.items(), key=lambda item: (-item[1], item[0]))[:top_n]
    return [
        PopularityEntry(template_id=tid, platform=platform, occurrence_count=count, rank=rank)
        for rank, (tid, count) in enumerate(ordered, start=1)
    ]


def cross_platform_overlap(
    pop_a: list[PopularityEntry], pop_b: list[PopularityEntry], k: int
) -> set[str]:
    """Template ids common to the top-k of both rankings.

    When k exceeds a list's length, the available prefix is used.
    """
    if k < 1:
        raise ParameterError(f"k must be a positive integer, got {k}")
    top_a = {e.template_id for e in sorted(pop_a, key=lambda e: e.rank)[:k]}
    top_b = {e.template_id for e in sorted(pop_b, key=lambda e: e.rank)[:k]}
    return top_a & top_b


def write_stats_tsv(rows: list[CommunityStats], path: Path | str) -> None:
    lines = ["\t".join(("platform", "community", "posts", "image_posts", "meme_posts", "mir"))]
    for row in rows:
        lines.append(
            f"{row.platform}\t{row.community}\t{row.posts}"
            f"\t{row.image_posts}\t{row.meme_posts}\t{row.mir}"
        )
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def write_popularity_tsv(entries: list[PopularityEntry], path: Path | str) -> None:
    lines = ["\t".join(("rank", "template_id", "count"))]
    for entry in entries:
        lines.append(f"{entry.rank}\t{entry.template_id}\t{entry.occurrence_count}")
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def write_overlap_json(overlap: set[str], path: Path | str) -> None:
    Path(path).write_text(json.dumps(sorted(overlap), indent=2) + "\n", encoding="utf-8")

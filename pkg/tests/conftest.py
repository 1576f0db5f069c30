"""Shared fixture builders: export lines, a small end-to-end lake, exemplar files."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from memeground.embedding import EmbeddingBatch, reference_embed, write_embedding_file
from memeground.ingest import (
    load_to_lake,
    parse_discord_export,
    parse_reddit_export,
    transform_filter_images,
)

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = DATA_DIR / "golden"

TEMPLATE_DRAKE = "imgflipmeme:181913649/Drake-Hotline-Bling"
TEMPLATE_ANDY = "imgflipmeme:14371066/Afraid-To-Ask-Andy"
TEMPLATE_BUTTON = "imgflipmeme:119139145/Press-button-hard-choice"
TEMPLATE_UNDERTAKER = "imgflipmeme:135678846/undertaker"
SMOKE_TEMPLATES = {
    "drake": TEMPLATE_DRAKE,
    "andy": TEMPLATE_ANDY,
    "button": TEMPLATE_BUTTON,
    "undertaker": TEMPLATE_UNDERTAKER,
}


def reddit_line(**overrides) -> str:
    record = {
        "title": "a post",
        "author": "u1",
        "selftext": "",
        "score": 10,
        "ups": 12,
        "downs": 2,
        "created_utc": 1688169600,
        "posturl": "https://reddit.example/r/memes/1",
        "num_comments": 3,
        "imageurl": "",
        "is_nsfw": False,
    }
    record.update(overrides)
    return json.dumps(record, ensure_ascii=False)


def discord_line(**overrides) -> str:
    record = {
        "content": "a message",
        "author": "user1",
        "pinned": False,
        "created_utc": 1688256000,
        "mentions": [],
        "reactions": [],
        "attachments": [],
    }
    record.update(overrides)
    return json.dumps(record, ensure_ascii=False)


def exemplar_bytes(template_id: str, j: int) -> bytes:
    return f"exemplar:{template_id}:{j}".encode()


@dataclass
class SmokeFixture:
    """Paths for the 20-post / 12-image-post smoke lake and its index files."""

    lake: Path
    embeddings: Path
    templates_emb: Path
    template_map: Path
    reddit_export: Path
    discord_export: Path
    reddit_images: Path
    discord_images: Path
    dim: int


def build_smoke_fixture(root: Path, dim: int = 768) -> SmokeFixture:
    """Build the deterministic smoke lake: 10 reddit + 10 discord posts.

    Six image posts per platform; three per platform are byte-identical to
    template exemplars (score 1.0 at the reference embedder), the rest are
    unrelated blobs that score near zero. One non-image format per
    platform (gif / webp) exercises the drop filter.
    """
    reddit_images = root / "reddit_images"
    discord_images = root / "discord_images"
    reddit_images.mkdir(parents=True)
    discord_images.mkdir(parents=True)

    (reddit_images / "r1.png").write_bytes(exemplar_bytes(TEMPLATE_DRAKE, 0))
    (reddit_images / "r2.png").write_bytes(exemplar_bytes(TEMPLATE_DRAKE, 1))
    (reddit_images / "r3.png").write_bytes(exemplar_bytes(TEMPLATE_ANDY, 0))
    for i in (4, 5, 6):
        (reddit_images / f"r{i}.png").write_bytes(f"reddit-image-{i}".encode())
    (reddit_images / "r7.gif").write_bytes(b"gif-bytes")

    (discord_images / "d1.jpg").write_bytes(exemplar_bytes(TEMPLATE_DRAKE, 2))
    (discord_images / "d2.jpg").write_bytes(exemplar_bytes(TEMPLATE_BUTTON, 0))
    (discord_images / "d3.jpg").write_bytes(exemplar_bytes(TEMPLATE_UNDERTAKER, 1))
    for i in (4, 5, 6):
        (discord_images / f"d{i}.jpg").write_bytes(f"discord-image-{i}".encode())
    (discord_images / "d7.webp").write_bytes(b"webp-bytes")

    reddit_lines = []
    for i in range(1, 11):
        if i <= 6:
            imageurl = f"https://img.example/r{i}.png"
        elif i == 7:
            imageurl = "https://img.example/r7.gif"
        else:
            imageurl = ""
        reddit_lines.append(
            reddit_line(
                title=f"reddit post {i}",
                author=f"u{i}",
                selftext="some body text" if i == 2 else "",
                score=10 + i,
                ups=12 + i,
                downs=2,
                created_utc=1688169600 + 60 * i,
                posturl=f"https://reddit.example/r/memes/{i}",
                num_comments=i,
                imageurl=imageurl,
                is_nsfw=i == 9,
            )
        )
    discord_lines = []
    for i in range(1, 11):
        if i <= 6:
            attachments = [f"https://cdn.example/d{i}.jpg"]
        elif i == 7:
            attachments = ["https://cdn.example/d7.webp"]
        else:
            attachments = []
        created = (
            1688256000 + 60 * i
            if i % 2
            else f"2023-07-02T{8 + i:02d}:30:00+02:00"
        )
        discord_lines.append(
            discord_line(
                content=f"discord message {i}",
                author=f"user{i}",
                pinned=i == 3,
                created_utc=created,
                reactions=[["\U0001f602", 2], ["\U0001f44d", 1]] if i == 1 else [],
                attachments=attachments,
            )
        )

    reddit_export = root / "reddit_memes.jsonl"
    discord_export = root / "discord_TheDungeon.jsonl"
    reddit_export.write_text("".join(line + "\n" for line in reddit_lines), encoding="utf-8")
    discord_export.write_text("".join(line + "\n" for line in discord_lines), encoding="utf-8")

    lake = root / "lake"
    posts_r, errors_r = parse_reddit_export(reddit_lines, "memes")
    assert not errors_r
    transform_r = transform_filter_images(posts_r, reddit_images)
    load_to_lake(posts_r, transform_r.images, lake)

    posts_d, errors_d = parse_discord_export(discord_lines, "TheDungeon")
    assert not errors_d
    transform_d = transform_filter_images(posts_d, discord_images)
    load_to_lake(posts_d, transform_d.images, lake)

    embeddings = root / "lake_embeddings.bin"
    entries = [
        (path.name, reference_embed(path.read_bytes(), dim))
        for path in sorted((lake / "images").iterdir())
    ]
    write_embedding_file(EmbeddingBatch(dim=dim, entries=entries), embeddings)

    templates_emb = root / "templates.bin"
    template_map = root / "template_map.tsv"
    exemplar_entries = []
    map_lines = []
    for slug, template_id in sorted(SMOKE_TEMPLATES.items()):
        for j in range(3):
            item_id = f"ex-{slug}-{j}.png"
            exemplar_entries.append((item_id, reference_embed(exemplar_bytes(template_id, j), dim)))
            map_lines.append(f"{item_id}\t{template_id}")
    write_embedding_file(EmbeddingBatch(dim=dim, entries=exemplar_entries), templates_emb)
    template_map.write_text("".join(line + "\n" for line in map_lines), encoding="utf-8")

    return SmokeFixture(
        lake=lake,
        embeddings=embeddings,
        templates_emb=templates_emb,
        template_map=template_map,
        reddit_export=reddit_export,
        discord_export=discord_export,
        reddit_images=reddit_images,
        discord_images=discord_images,
        dim=dim,
    )

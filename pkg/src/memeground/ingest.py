"""ETL for platform export files: parse, filter to image posts, load the lake.

One bad line never aborts a batch: malformed records are collected as
RecordError values alongside the successfully parsed posts. Lake outputs
are sorted before writing, so re-running on identical input is
byte-idempotent.

Lake layout:

    lake_root/posts/<platform>/<community>.jsonl   one CanonicalPost per line
    lake_root/images/<image_id>                    image bytes, named by id
    lake_root/manifest.json                        merged per-community manifests

image_ref on a post is the source file's basename (e.g. "c.PNG") and doubles
as the image_id, so posts reference stored images with no mapping rules.
"""

from __future__ import annotations

import json
import math
import posixpath
import re
import shutil
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator
from urllib.parse import urlsplit

from .errors import LakeError, TimestampError

PLATFORMS = ("discord", "reddit")
IMAGE_FORMATS = ("jpg", "jpeg", "png")

REDDIT_FIELDS = (
    "title",
    "author",
    "selftext",
    "score",
    "ups",
    "downs",
    "created_utc",
    "posturl",
    "num_comments",
    "imageurl",
    "is_nsfw",
)
DISCORD_FIELDS = (
    "content",
    "author",
    "pinned",
    "created_utc",
    "mentions",
    "reactions",
    "attachments",
)

_EPOCH_TEXT = re.compile(r"[0-9]+(\.[0-9]+)?")
_POST_KEYS = (
    "post_id",
    "platform",
    "community",
    "author",
    "created_utc",
    "image_ref",
    "text",
    "engagement",
    "nsfw",
)


@dataclass(frozen=True)
class RecordError:
    """A rejected input record: 1-based line number (None for file-level errors) and reason."""

    line: int | None
    reason: str


@dataclass(frozen=True)
class CanonicalPost:
    """Platform-neutral post record unifying the Reddit and Discord export schemas."""

    post_id: str
    platform: str
    community: str
    author: str
    created_utc: str
    image_ref: str | None
    text: str
    engagement: int
    nsfw: bool

    def to_json_dict(self) -> dict:
        return {key: getattr(self, key) for key in _POST_KEYS}

    @classmethod
    def from_json_dict(cls, data: dict) -> "CanonicalPost":
        return cls(**{key: data[key] for key in _POST_KEYS})


@dataclass(frozen=True)
class ImageObject:
    """A stored lake image; content_ref is the lake-relative path."""

    image_id: str
    format: str
    byte_length: int
    content_ref: str
    source_path: Path  # where the bytes come from; not serialized


@dataclass(frozen=True)
class LakeManifest:
    platform: str
    community: str
    post_count: int
    image_post_count: int
    post_ids: list[str]

    def to_json_dict(self) -> dict:
        return {
            "platform": self.platform,
            "community": self.community,
            "post_count": self.post_count,
            "image_post_count": self.image_post_count,
            "post_ids": self.post_ids,
        }


@dataclass
class TransformResult:
    """Images that survived the format filter, plus what was dropped and why."""

    images: list[ImageObject]
    dropped_formats: dict[str, int]
    errors: list[RecordError]


def normalize_timestamp(raw) -> str:
    """Normalize epoch seconds or an ISO-8601 instant to "YYYY-MM-DDThh:mm:ssZ".

    Offsets are converted to UTC, naive instants are taken as UTC, and
    sub-second precision is truncated. Idempotent on its own output.
    """
    if isinstance(raw, bool):
        raise TimestampError(f"not a timestamp: {raw!r}")
    if isinstance(raw, (int, float)):
        if not math.isfinite(raw) or raw < 0:
            raise TimestampError(f"epoch seconds must be finite and non-negative, got {raw!r}")
        dt = datetime.fromtimestamp(int(raw), tz=timezone.utc)
    elif isinstance(raw, str):
        text = raw.strip()
        if not text:
            raise TimestampError("empty timestamp")
        if _EPOCH_TEXT.fullmatch(text):
            return normalize_timestamp(float(text))
        if text.endswith(("Z", "z")):
            text = text[:-1] + "+00:00"
        try:
            dt = datetime.fromisoformat(text)
        except ValueError:
            raise TimestampError(f"unparseable timestamp: {raw!r}") from None
        if dt.tzinfo is None:
            dt = dt.replace(tzinfo=timezone.utc)
        dt = dt.astimezone(timezone.utc)
    else:
        raise TimestampError(f"not a timestamp: {raw!r}")
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def _image_basename(url_or_path: str) -> str | None:
    """Basename of a URL/path if its extension is an allowed image format."""
    if not isinstance(url_or_path, str) or not url_or_path:
        return None
    name = posixpath.basename(urlsplit(url_or_path).path)
    suffix = posixpath.splitext(name)[1].lower().lstrip(".")
    if suffix in IMAGE_FORMATS and name != f".{suffix}":
        return name
    return None


def _require_int(value, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"field {field!r} must be a number, got {type(value).__name__}")
    if isinstance(value, float) and not value.is_integer():
        raise ValueError(f"field {field!r} must be an integer, got {value!r}")
    return int(value)


def _require_str(value, field: str) -> str:
    if not isinstance(value, str):
        raise ValueError(f"field {field!r} must be text, got {type(value).__name__}")
    return value


def _require_bool(value, field: str) -> bool:
    if not isinstance(value, bool):
        raise ValueError(f"field {field!r} must be a boolean, got {type(value).__name__}")
    return value


def _iter_records(
    lines: Iterable[str], required: tuple[str, ...]
) -> Iterator[tuple[int, dict] | tuple[int, RecordError]]:
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            yield number, RecordError(line=number, reason=f"malformed JSON: {exc.msg}")
            continue
        if not isinstance(record, dict):
            yield number, RecordError(line=number, reason="line is not a JSON object")
            continue
        missing = [f for f in required if f not in record]
        if missing:
            yield number, RecordError(line=number, reason=f"missing fields: {', '.join(missing)}")
            continue
        yield number, record


def parse_reddit_export(
    lines: Iterable[str], community: str
) -> tuple[list[CanonicalPost], list[RecordError]]:
    """Parse a Reddit JSONL export (11 fields per record) into canonical posts.

    post_id is synthesized as reddit:<community>:<line number zero-padded to
    8 digits>; image_ref is set only for .jpg/.jpeg/.png image URLs.
    """
    posts: list[CanonicalPost] = []
    errors: list[RecordError] = []
    for number, item in _iter_records(lines, REDDIT_FIELDS):
        if isinstance(item, RecordError):
            errors.append(item)
            continue
        try:
            title = _require_str(item["title"], "title")
            selftext = _require_str(item["selftext"], "selftext")
            created = normalize_timestamp(item["created_utc"])
            score = _require_int(item["score"], "score")
            _require_int(item["ups"], "ups")
            _require_int(item["downs"], "downs")
            num_comments = _require_int(item["num_comments"], "num_comments")
            if num_comments < 0:
                raise ValueError("field 'num_comments' must be non-negative")
            nsfw = _require_bool(item["is_nsfw"], "is_nsfw")
            author = _require_str(item["author"], "author")
            imageurl = _require_str(item["imageurl"], "imageurl")
        except (ValueError, TimestampError) as exc:
            errors.append(RecordError(line=number, reason=str(exc)))
            continue
        posts.append(
            CanonicalPost(
                post_id=f"reddit:{community}:{number:08d}",
                platform="reddit",
                community=community,
                author=author,
                created_utc=created,
                image_ref=_image_basename(imageurl),
                text=title if not selftext else f"{title}\n{selftext}",
                engagement=score,
                nsfw=nsfw,
            )
        )
    return posts, errors


def _reaction_count(entry) -> int:
    if isinstance(entry, dict) and "count" in entry:
        return _require_int(entry["count"], "reactions.count")
    if isinstance(entry, (list, tuple)) and len(entry) == 2:
        return _require_int(entry[1], "reactions[1]")
    raise ValueError(f"unrecognized reaction entry: {entry!r}")


def parse_discord_export(
    lines: Iterable[str], community: str
) -> tuple[list[CanonicalPost], list[RecordError]]:
    """Parse a Discord JSONL export (7 fields per record) into canonical posts.

    image_ref comes from the first attachment with an allowed image
    extension; engagement is the sum of reaction counts.
    """
    posts: list[CanonicalPost] = []
    errors: list[RecordError] = []
    for number, item in _iter_records(lines, DISCORD_FIELDS):
        if isinstance(item, RecordError):
            errors.append(item)
            continue
        try:
            content = _require_str(item["content"], "content")
            author = _require_str(item["author"], "author")
            _require_bool(item["pinned"], "pinned")
            created = normalize_timestamp(item["created_utc"])
            mentions = item["mentions"]
            if not isinstance(mentions, list):
                raise ValueError("field 'mentions' must be a list")
            reactions = item["reactions"]
            if not isinstance(reactions, list):
                raise ValueError("field 'reactions' must be a list")
            engagement = sum(_reaction_count(entry) for entry in reactions)
            attachments = item["attachments"]
            if not isinstance(attachments, list):
                raise ValueError("field 'attachments' must be a list")
            image_ref = None
            for attachment in attachments:
                if not isinstance(attachment, str) or not attachment:
                    raise ValueError("attachments entries must be non-empty strings")
                if image_ref is None:
                    image_ref = _image_basename(attachment)
        except (ValueError, TimestampError) as exc:
            errors.append(RecordError(line=number, reason=str(exc)))
            continue
        posts.append(
            CanonicalPost(
                post_id=f"discord:{community}:{number:08d}",
                platform="discord",
                community=community,
                author=author,
                created_utc=created,
                image_ref=image_ref,
                text=content,
                engagement=engagement,
                nsfw=False,
            )
        )
    return posts, errors


def transform_filter_images(posts: list[CanonicalPost], images_dir: Path | str) -> TransformResult:
    """Resolve image_refs against images_dir, keeping only jpg/jpeg/png files.

    Disallowed extensions are dropped silently but tallied in
    dropped_formats; missing or empty files become RecordErrors and their
    posts are excluded from image-post counts.
    """
    images_dir = Path(images_dir)
    result = TransformResult(images=[], dropped_formats={}, errors=[])
    seen: set[str] = set()
    for ref in sorted({p.image_ref for p in posts if p.image_ref}):
        if ref in seen:
            continue
        seen.add(ref)
        suffix = posixpath.splitext(ref)[1].lower().lstrip(".")
        if suffix not in IMAGE_FORMATS:
            key = suffix if suffix else "(none)"
            result.dropped_formats[key] = result.dropped_formats.get(key, 0) + 1
            continue
        source = images_dir / ref
        if not source.is_file():
            result.errors.append(RecordError(line=None, reason=f"referenced file missing: {ref}"))
            continue
        byte_length = source.stat().st_size
        if byte_length == 0:
            result.errors.append(RecordError(line=None, reason=f"referenced file empty: {ref}"))
            continue
        result.images.append(
            ImageObject(
                image_id=ref,
                format=suffix,
                byte_length=byte_length,
                content_ref=f"images/{ref}",
                source_path=source,
            )
        )
    return result


def load_to_lake(
    posts: list[CanonicalPost], images: list[ImageObject], lake_root: Path | str
) -> LakeManifest:
    """Write one community's posts and images into the lake; returns its manifest.

    Outputs are a pure function of the inputs: posts are sorted by post_id
    and the merged manifest.json is rewritten in sorted order, so identical
    inputs produce byte-identical files.
    """
    if not posts:
        raise LakeError("refusing to load an empty post batch")
    keys = {(p.platform, p.community) for p in posts}
    if len(keys) != 1:
        raise LakeError(f"posts span multiple (platform, community) pairs: {sorted(keys)}")
    platform, community = keys.pop()
    if platform not in PLATFORMS:
        raise LakeError(f"unknown platform {platform!r}")

    ordered = sorted(posts, key=lambda p: p.post_id)
    ids = [p.post_id for p in ordered]
    if len(set(ids)) != len(ids):
        duplicate = next(i for n, i in enumerate(ids) if i in ids[:n])
        raise LakeError(f"duplicate post_id {duplicate!r}")

    lake_root = Path(lake_root)
    image_ids = {img.image_id for img in images}
    image_post_count = sum(1 for p in ordered if p.image_ref in image_ids)

    try:
        posts_dir = lake_root / "posts" / platform
        posts_dir.mkdir(parents=True, exist_ok=True)
        lines = [
            json.dumps(p.to_json_dict(), ensure_ascii=False, separators=(", ", ": "))
            for p in ordered
        ]
        (posts_dir / f"{community}.jsonl").write_text(
            "".join(line + "\n" for line in lines), encoding="utf-8"
        )

        images_dir = lake_root / "images"
        images_dir.mkdir(parents=True, exist_ok=True)
        for image in sorted(images, key=lambda i: i.image_id):
            shutil.copyfile(image.source_path, lake_root / image.content_ref)

        manifest = LakeManifest(
            platform=platform,
            community=community,
            post_count=len(ordered),
            image_post_count=image_post_count,
            post_ids=ids,
        )
        _merge_manifest(lake_root, manifest)
    except OSError as exc:
        raise LakeError(f"lake write failed at {exc.filename or lake_root}: {exc}") from exc
    return manifest


def _merge_manifest(lake_root: Path, manifest: LakeManifest) -> None:
    manifest_path = lake_root / "manifest.json"
    communities: list[dict] = []
    if manifest_path.exists():
        try:
            existing = json.loads(manifest_path.read_text(encoding="utf-8"))
            communities = list(existing.get("communities", []))
        except (json.JSONDecodeError, AttributeError) as exc:
            raise LakeError(f"corrupt manifest at {manifest_path}: {exc}") from exc
    key = (manifest.platform, manifest.community)
    communities = [c for c in communities if (c.get("platform"), c.get("community")) != key]
    communities.append(manifest.to_json_dict())
    communities.sort(key=lambda c: (c["platform"], c["community"]))
    manifest_path.write_text(
        json.dumps({"communities": communities}, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def read_lake_manifest(lake_root: Path | str) -> list[LakeManifest]:
    """Parse the merged manifest.json into per-community LakeManifest records."""
    manifest_path = Path(lake_root) / "manifest.json"
    if not manifest_path.is_file():
        raise LakeError(f"no manifest at {manifest_path}")
    data = json.loads(manifest_path.read_text(encoding="utf-8"))
    return [
        LakeManifest(
            platform=entry["platform"],
            community=entry["community"],
            post_count=entry["post_count"],
            image_post_count=entry["image_post_count"],
            post_ids=list(entry["post_ids"]),
        )
        for entry in data.get("communities", [])
    ]


def iter_lake_posts(lake_root: Path | str) -> Iterator[CanonicalPost]:
    """Yield every post in the lake, ordered by file path then line."""
    posts_root = Path(lake_root) / "posts"
    if not posts_root.is_dir():
        raise LakeError(f"no posts directory under {lake_root}")
    for path in sorted(posts_root.glob("*/*.jsonl")):
        with path.open("r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    yield CanonicalPost.from_json_dict(json.loads(line))


def lake_image_ids(lake_root: Path | str) -> set[str]:
    """Ids (filenames) of all images stored in the lake."""
    images_dir = Path(lake_root) / "images"
    if not images_dir.is_dir():
        return set()
    return {p.name for p in images_dir.iterdir() if p.is_file()}

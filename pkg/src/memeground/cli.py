"""Command-line entry point wiring the full pipeline.

Exit codes: 0 success, 1 domain errors (bad formats, missing coverage,
failed selection), 2 usage errors. Diagnostics go to stderr; data goes to
files or stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from decimal import Decimal, InvalidOperation
from pathlib import Path

from . import analytics, evaluation, ingest, kg, pipeline
from .embedding import EmbeddingBatch, read_manifest_tsv, reference_embed, write_embedding_file
from .errors import MemegroundError
from .index import load_index_files

DEFAULT_THRESHOLD = 0.60
DEFAULT_DIM = 768
DEFAULT_GRID = "0.50:0.70:0.01"
DEFAULT_MIN_PRECISION = 0.9
DEFAULT_TOP_N = 5


def _fraction(text: str) -> float:
    """Threshold as a fraction in [0, 1]; percent forms are rejected."""
    if "%" in text:
        raise argparse.ArgumentTypeError(
            f"percent form {text!r} rejected; pass a fraction like 0.6"
        )
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return value


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _grid(text: str) -> list[float]:
    """Parse START:END:STEP into an inclusive ascending threshold list."""
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must be START:END:STEP, got {text!r}")
    try:
        start, end, step = (Decimal(p) for p in parts)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"grid has non-numeric parts: {text!r}") from None
    if step <= 0 or end < start:
        raise argparse.ArgumentTypeError(f"need START <= END and STEP > 0, got {text!r}")
    values: list[float] = []
    current = start
    while current <= end:
        values.append(float(current))
        current += step
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="memeground",
        description="Identify meme posts by cosine matching against template exemplars "
        "and report prevalence, popularity, and knowledge-graph context.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse an export file and load it into the lake")
    p.add_argument("--platform", choices=ingest.PLATFORMS, required=True)
    p.add_argument("--community", required=True, help="subreddit or channel name")
    p.add_argument("--input", required=True, type=Path, help="JSONL export file")
    p.add_argument("--images-dir", required=True, type=Path, help="directory with image files")
    p.add_argument("--lake", required=True, type=Path, help="lake root directory")

    p = sub.add_parser("embed-ref", help="write reference embeddings as an EMB1 file")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--manifest", type=Path, help="TSV of item_id TAB file-path")
    source.add_argument("--lake", type=Path, help="embed every image stored in this lake")
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--dim", type=_positive_int, default=DEFAULT_DIM,
                   help=f"vector size (default {DEFAULT_DIM})")

    p = sub.add_parser("index-build-check", help="build the exemplar index and report its shape")
    p.add_argument("--templates", required=True, type=Path, help="exemplar EMB1 file")
    p.add_argument("--template-map", required=True, type=Path, help="TSV of item_id TAB template_id")

    p = sub.add_parser("classify", help="classify every lake image post and write matches.jsonl")
    p.add_argument("--lake", required=True, type=Path)
    p.add_argument("--embeddings", required=True, type=Path, help="EMB1 file covering lake images")
    p.add_argument("--templates", required=True, type=Path, help="exemplar EMB1 file")
    p.add_argument("--template-map", required=True, type=Path)
    p.add_argument("--threshold", type=_fraction, default=DEFAULT_THRESHOLD,
                   help=f"meme decision threshold (default {DEFAULT_THRESHOLD})")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("sweep", help="compute precision/recall over a threshold grid")
    p.add_argument("--labels", required=True, type=Path, help="TSV of post_id TAB 0|1")
    p.add_argument("--matches", required=True, type=Path, help="matches.jsonl with scores")
    p.add_argument("--grid", type=_grid, default=DEFAULT_GRID,
                   help=f"START:END:STEP (default {DEFAULT_GRID})")
    p.add_argument("--out", required=True, type=Path)

    p = sub.add_parser("select-threshold", help="pick the best threshold from a sweep")
    p.add_argument("--sweep", required=True, type=Path, help="sweep TSV")
    p.add_argument("--min-precision", type=_fraction, default=DEFAULT_MIN_PRECISION,
                   help=f"precision floor (default {DEFAULT_MIN_PRECISION})")

    p = sub.add_parser("report", help="write prevalence stats, popularity, and overlap")
    p.add_argument("--lake", required=True, type=Path)
    p.add_argument("--matches", required=True, type=Path)
    p.add_argument("--out-dir", required=True, type=Path)
    p.add_argument("--top-n", type=_positive_int, default=DEFAULT_TOP_N,
                   help=f"popularity list size (default {DEFAULT_TOP_N})")

    p = sub.add_parser("kg-context", help="assemble a context card for one template")
    p.add_argument("--kg", required=True, type=Path, help="edge-list TSV")
    p.add_argument("--template", required=True, help="template node id")
    p.add_argument("--out", type=Path, help="write JSON here instead of stdout")

    return parser


def _cmd_ingest(args: argparse.Namespace) -> int:
    lines = args.input.read_text(encoding="utf-8").splitlines()
    if args.platform == "reddit":
        posts, errors = ingest.parse_reddit_export(lines, args.community)
    else:
        posts, errors = ingest.parse_discord_export(lines, args.community)
    transform = ingest.transform_filter_images(posts, args.images_dir)
    errors = errors + transform.errors
    for error in errors:
        where = f"line {error.line}" if error.line is not None else "file"
        print(f"record error ({where}): {error.reason}", file=sys.stderr)
    if posts:
        manifest = ingest.load_to_lake(posts, transform.images, args.lake)
        image_post_count = manifest.image_post_count
    else:
        image_post_count = 0
    print(
        json.dumps(
            {
                "platform": args.platform,
                "community": args.community,
                "posts": len(posts),
                "image_posts": image_post_count,
                "record_errors": len(errors),
                "dropped_formats": dict(sorted(transform.dropped_formats.items())),
            }
        )
    )
    return 0


def _cmd_embed_ref(args: argparse.Namespace) -> int:
    if args.manifest is not None:
        items = read_manifest_tsv(args.manifest)
    else:
        images_dir = args.lake / "images"
        files = sorted(images_dir.iterdir()) if images_dir.is_dir() else []
        items = [(path.name, path) for path in files if path.is_file()]
    entries = [(item_id, reference_embed(path.read_bytes(), args.dim)) for item_id, path in items]
    write_embedding_file(EmbeddingBatch(dim=args.dim, entries=entries), args.out)
    print(json.dumps({"embedded": len(entries), "dim": args.dim, "out": str(args.out)}))
    return 0


def _cmd_index_build_check(args: argparse.Namespace) -> int:
    index = load_index_files(args.templates, args.template_map)
    print(
        json.dumps(
            {"dim": index.dim, "exemplars": len(index), "templates": len(index.template_ids)}
        )
    )
    return 0


def _cmd_classify(args: argparse.Namespace) -> int:
    index = load_index_files(args.templates, args.template_map)
    records = pipeline.run_classification(args.lake, args.embeddings, index, args.threshold)
    pipeline.write_matches(records, args.out)
    print(
        json.dumps(
            {
                "records": len(records),
                "memes": sum(1 for r in records if r.is_meme),
                "threshold": args.threshold,
                "out": str(args.out),
            }
        )
    )
    return 0


def _cmd_sweep(args: argparse.Namespace) -> int:
    labels = evaluation.read_labels_tsv(args.labels)
    grid = args.grid if isinstance(args.grid, list) else _grid(args.grid)
    scores = {r.post_id: r.score for r in pipeline.read_matches(args.matches)}
    points = evaluation.sweep(labels, scores, grid)
    evaluation.write_sweep_tsv(points, args.out)
    print(json.dumps({"points": len(points), "out": str(args.out)}))
    return 0


def _cmd_select_threshold(args: argparse.Namespace) -> int:
    points = evaluation.read_sweep_tsv(args.sweep)
    chosen = evaluation.select_threshold(points, min_precision=args.min_precision)
    print(f"{chosen:.2f}")
    return 0


def _cmd_report(args: argparse.Namespace) -> int:
    posts = list(ingest.iter_lake_posts(args.lake))
    matches = pipeline.read_matches(args.matches)
    args.out_dir.mkdir(parents=True, exist_ok=True)

    stats = analytics.community_stats(posts, matches)
    analytics.write_stats_tsv(stats, args.out_dir / "stats.tsv")

    rankings = {}
    for platform in ingest.PLATFORMS:
        entries = analytics.popularity(matches, platform, args.top_n)
        analytics.write_popularity_tsv(entries, args.out_dir / f"popularity_{platform}.tsv")
        rankings[platform] = entries
    overlap = analytics.cross_platform_overlap(
        rankings["reddit"], rankings["discord"], args.top_n
    )
    analytics.write_overlap_json(overlap, args.out_dir / "overlap.json")

    print(
        json.dumps(
            {
                "stats_rows": len(stats),
                "overlap_size": len(overlap),
                "out_dir": str(args.out_dir),
            }
        )
    )
    return 0


def _cmd_kg_context(args: argparse.Namespace) -> int:
    graph = kg.load_kg_tsv(args.kg)
    card = kg.context_card(graph, args.template)
    text = json.dumps(card.to_json_dict(), ensure_ascii=False, indent=2)
    if args.out is not None:
        args.out.write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


_COMMANDS = {
    "ingest": _cmd_ingest,
    "embed-ref": _cmd_embed_ref,
    "index-build-check": _cmd_index_build_check,
    "classify": _cmd_classify,
    "sweep": _cmd_sweep,
    "select-threshold": _cmd_select_threshold,
    "report": _cmd_report,
    "kg-context": _cmd_kg_context,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return _COMMANDS[args.command](args)
    except MemegroundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

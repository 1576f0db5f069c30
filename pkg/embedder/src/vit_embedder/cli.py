"""CLI: embed an image manifest into an EMB1 file."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .emb1 import Emb1Error
from .embedder import EmbedJob, ManifestError, embed_manifest, read_manifest_tsv
from .model import DEFAULT_MODEL_ID, ModelError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vit-embed",
        description="Encode manifest images with a vision transformer and write "
        "unit-norm CLS embeddings as an EMB1 file.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("embed", help="embed every image listed in a manifest")
    p.add_argument("--manifest", required=True, type=Path, help="TSV of item_id TAB file-path")
    p.add_argument("--out", required=True, type=Path, help="EMB1 output path")
    p.add_argument(
        "--model-id",
        default=DEFAULT_MODEL_ID,
        help=f"checkpoint name, local path, or random:<seed> (default {DEFAULT_MODEL_ID})",
    )
    p.add_argument("--dim", type=int, default=768, help="embedding size (default 768)")
    p.add_argument("--batch-size", type=int, default=8)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        manifest = read_manifest_tsv(args.manifest)
        job = EmbedJob(
            manifest=manifest, model_id=args.model_id, dim=args.dim, batch_size=args.batch_size
        )
        result = embed_manifest(job, args.out)
    except (ManifestError, ModelError, Emb1Error) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1
    for item_id, reason in result.skipped:
        print(f"skipped {item_id}: {reason}", file=sys.stderr)
    print(
        json.dumps(
            {
                "embedded": result.embedded,
                "skipped": len(result.skipped),
                "dim": args.dim,
                "out": str(args.out),
            }
        )
    )
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

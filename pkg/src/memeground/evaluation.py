"""Confusion counts, precision/recall sweeps, and threshold selection.

Conventions: an item is predicted a meme iff its score >= t; precision and
recall fall back to 0 when their denominators are empty; F1 is 0 when
precision + recall is 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import CoverageError, FormatError, SelectionError


@dataclass(frozen=True)
class LabeledExample:
    post_id: str
    is_meme: bool


@dataclass(frozen=True)
class SweepPoint:
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    precision: float
    recall: float
    f1: float
    predicted_meme_count: int


def confusion(
    labels: list[LabeledExample], scores: dict[str, float], t: float
) -> tuple[int, int, int, int]:
    """Exact (tp, fp, tn, fn) at threshold t; every label needs a score."""
    missing = sorted({x.post_id for x in labels if x.post_id not in scores})
    if missing:
        raise CoverageError(
            f"{len(missing)} labeled post(s) lack scores: {', '.join(missing[:5])}"
            + ("..." if len(missing) > 5 else ""),
            missing_ids=missing,
        )
    tp = fp = tn = fn = 0
    for example in labels:
        predicted = scores[example.post_id] >= t
        if predicted and example.is_meme:
            tp += 1
        elif predicted and not example.is_meme:
            fp += 1
        elif not predicted and example.is_meme:
            fn += 1
        else:
            tn += 1
    return tp, fp, tn, fn


def _point(t: float, tp: int, fp: int, tn: int, fn: int) -> SweepPoint:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return SweepPoint(
        threshold=t,
        tp=tp,
        fp=fp,
        tn=tn,
        fn=fn,
        precision=precision,
        recall=recall,
        f1=f1,
        predicted_meme_count=tp + fp,
    )


def sweep(
    labels: list[LabeledExample], scores: dict[str, float], thresholds: list[float]
) -> list[SweepPoint]:
    """One SweepPoint per threshold (callers pass them sorted ascending)."""
    return [_point(t, *confusion(labels, scores, t)) for t in thresholds]


def default_grid() -> list[float]:
    """The studied threshold range: 0.50 to 0.70 in steps of 0.01."""
    return [i / 100 for i in range(50, 71)]


def select_threshold(points: list[SweepPoint], min_precision: float = 0.9) -> float:
    """Highest-recall threshold among points with precision >= min_precision.

    Recall ties go to the higher precision, then to the lower threshold.
    """
    qualifying = [p for p in points if p.precision >= min_precision]
    if not qualifying:
        raise SelectionError(
            f"no sweep point reaches precision {min_precision} "
            f"(best is {max((p.precision for p in points), default=0.0):.4f})"
        )
    best = sorted(qualifying, key=lambda p: (-p.recall, -p.precision, p.threshold))[0]
    return best.threshold


def read_labels_tsv(path: Path | str) -> list[LabeledExample]:
    """Read labels.tsv: `post_id TAB 0|1` per line, no header, unique ids."""
    labels: list[LabeledExample] = []
    seen: set[str] = set()
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        for number, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            columns = line.split("\t")
            if len(columns) != 2:
                raise FormatError(f"labels row {number}: expected 2 columns, got {len(columns)}")
            post_id, value = columns
            if value not in ("0", "1"):
                raise FormatError(f"labels row {number}: label must be 0 or 1, got {value!r}")
            if post_id in seen:
                raise FormatError(f"labels row {number}: duplicate post_id {post_id!r}")
            seen.add(post_id)
            labels.append(LabeledExample(post_id=post_id, is_meme=value == "1"))
    return labels


_SWEEP_COLUMNS = (
    "threshold",
    "tp",
    "fp",
    "tn",
    "fn",
    "precision",
    "recall",
    "f1",
    "predicted_meme_count",
)


def write_sweep_tsv(points: list[SweepPoint], path: Path | str) -> None:
    lines = ["\t".join(_SWEEP_COLUMNS)]
    for p in points:
        lines.append(
            f"{p.threshold:.2f}\t{p.tp}\t{p.fp}\t{p.tn}\t{p.fn}"
            f"\t{p.precision:.6f}\t{p.recall:.6f}\t{p.f1:.6f}\t{p.predicted_meme_count}"
        )
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def read_sweep_tsv(path: Path | str) -> list[SweepPoint]:
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if tuple(header) != _SWEEP_COLUMNS:
            raise FormatError(f"sweep row 1: expected header {_SWEEP_COLUMNS}")
        points: list[SweepPoint] = []
        for number, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            columns = line.split("\t")
            if len(columns) != len(_SWEEP_COLUMNS):
                raise FormatError(f"sweep row {number}: expected {len(_SWEEP_COLUMNS)} columns")
            try:
                points.append(
                    SweepPoint(
                        threshold=float(columns[0]),
                        tp=int(columns[1]),
                        fp=int(columns[2]),
                        tn=int(columns[3]),
                        fn=int(columns[4]),
                        precision=float(columns[5]),
                        recall=float(columns[6]),
                        f1=float(columns[7]),
                        predicted_meme_count=int(columns[8]),
                    )
                )
            except ValueError as exc:
                raise FormatError(f"sweep row {number}: {exc}") from None
    return points

"""Exact flat similarity index over template exemplars.

Search is exhaustive: every query is scored against every stored exemplar
with a float64 inner product (cosine similarity, since vectors are unit
length). No approximation, no mutation after build. Ties are broken
lexicographically so results are reproducible across platforms.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .embedding import (
    NORM_FILE_TOLERANCE,
    check_unit_norm,
    read_embedding_file,
)
from .errors import (
    BuildError,
    FormatError,
    NormalizationError,
    ParameterError,
    QueryError,
)


@dataclass(frozen=True)
class TemplateExemplar:
    """One indexed exemplar image vector for a template."""

    template_id: str
    exemplar_idx: int
    vector: np.ndarray


@dataclass(frozen=True)
class MatchResult:
    template_id: str
    score: float
    exemplar_idx: int


@dataclass(frozen=True)
class Classification:
    item_id: str
    is_meme: bool
    best: MatchResult
    threshold: float


class FlatIndex:
    """Immutable exhaustive-search index; build via build_index()."""

    def __init__(self, dim: int, exemplars: list[TemplateExemplar], _matrix: np.ndarray):
        self.dim = dim
        self.exemplars = exemplars
        self._matrix = _matrix  # float64 copy of the stored float32 vectors
        self._matrix.setflags(write=False)

    def __len__(self) -> int:
        return len(self.exemplars)

    @property
    def template_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for exemplar in self.exemplars:
            seen.setdefault(exemplar.template_id, None)
        return list(seen)


def build_index(exemplars: list[TemplateExemplar]) -> FlatIndex:
    """Validate and sort exemplars into an immutable flat index.

    Any number of exemplars per template is accepted (three per template is
    the usual configuration, not a requirement).
    """
    if not exemplars:
        raise BuildError("cannot build an index from zero exemplars")
    dim = int(exemplars[0].vector.shape[0])
    keys: set[tuple[str, int]] = set()
    for exemplar in exemplars:
        if exemplar.vector.ndim != 1 or int(exemplar.vector.shape[0]) != dim:
            raise BuildError(
                f"dim mismatch: {exemplar.template_id}/{exemplar.exemplar_idx} has "
                f"{exemplar.vector.shape[0]} dims, expected {dim}"
            )
        if exemplar.exemplar_idx < 0:
            raise BuildError(
                f"negative exemplar_idx for template {exemplar.template_id!r}"
            )
        key = (exemplar.template_id, exemplar.exemplar_idx)
        if key in keys:
            raise BuildError(f"duplicate exemplar key {key!r}")
        keys.add(key)
        check_unit_norm(
            exemplar.vector,
            NORM_FILE_TOLERANCE,
            context=f"{exemplar.template_id}/{exemplar.exemplar_idx}",
        )
    ordered = sorted(exemplars, key=lambda e: (e.template_id, e.exemplar_idx))
    stored = [
        TemplateExemplar(e.template_id, e.exemplar_idx, np.asarray(e.vector, dtype=np.float32))
        for e in ordered
    ]
    matrix = np.stack([e.vector for e in stored]).astype(np.float64)
    return FlatIndex(dim=dim, exemplars=stored, _matrix=matrix)


def _scores(index: FlatIndex, q: np.ndarray) -> np.ndarray:
    if q.ndim != 1 or int(q.shape[0]) != index.dim:
        raise QueryError(f"query has {q.shape} dims, index expects ({index.dim},)")
    try:
        check_unit_norm(q, NORM_FILE_TOLERANCE, context="query")
    except NormalizationError as exc:
        raise QueryError(str(exc)) from None
    return index._matrix @ np.asarray(q, dtype=np.float64)


def query_topk(index: FlatIndex, q: np.ndarray, k: int) -> list[MatchResult]:
    """Top-k exemplar matches by exact inner product, score descending.

    Ties break by (template_id, exemplar_idx) ascending; result length is
    min(k, number of exemplars).
    """
    if k < 1:
        raise ParameterError(f"k must be a positive integer, got {k}")
    scores = _scores(index, q)
    order = sorted(
        range(len(index.exemplars)),
        key=lambda i: (-scores[i], index.exemplars[i].template_id, index.exemplars[i].exemplar_idx),
    )
    return [
        MatchResult(
            template_id=index.exemplars[i].template_id,
            score=float(scores[i]),
            exemplar_idx=index.exemplars[i].exemplar_idx,
        )
        for i in order[: min(k, len(order))]
    ]


def best_template(index: FlatIndex, q: np.ndarray) -> MatchResult:
    """Highest-scoring template, where a template scores as the max over its exemplars.

    Template ties go to the lexicographically smallest template_id; exemplar
    ties within a template go to the smallest exemplar_idx.
    """
    scores = _scores(index, q)
    best_per_template: dict[str, tuple[float, int]] = {}
    for i, exemplar in enumerate(index.exemplars):
        score = float(scores[i])
        current = best_per_template.get(exemplar.template_id)
        if current is None or score > current[0]:
            best_per_template[exemplar.template_id] = (score, exemplar.exemplar_idx)
    winner_id = ""
    winner: tuple[float, int] | None = None
    for template_id in sorted(best_per_template):
        candidate = best_per_template[template_id]
        if winner is None or candidate[0] > winner[0]:
            winner_id, winner = template_id, candidate
    assert winner is not None
    return MatchResult(template_id=winner_id, score=winner[0], exemplar_idx=winner[1])


def classify(index: FlatIndex, q: np.ndarray, t: float, item_id: str = "") -> Classification:
    """Meme/non-meme decision: meme iff the best template score is >= t.

    A score exactly equal to t counts as a meme (only scores strictly below
    the threshold are non-memes).
    """
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"threshold must lie in [0, 1], got {t}")
    best = best_template(index, q)
    return Classification(item_id=item_id, is_meme=best.score >= t, best=best, threshold=t)


def read_template_map(path: Path | str) -> dict[str, str]:
    """Read the exemplar-to-template map TSV: `exemplar_item_id TAB template_id`."""
    mapping: dict[str, str] = {}
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        for number, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            columns = line.split("\t")
            if len(columns) != 2:
                raise FormatError(
                    f"template map row {number}: expected 2 columns, got {len(columns)}"
                )
            item_id, template_id = columns
            if not item_id or not template_id:
                raise FormatError(f"template map row {number}: empty field")
            if item_id in mapping:
                raise FormatError(f"template map row {number}: duplicate item {item_id!r}")
            mapping[item_id] = template_id
    return mapping


def load_index_files(embeddings_path: Path | str, template_map_path: Path | str) -> FlatIndex:
    """Build an index from its persisted form: exemplar EMB1 file + template map TSV.

    exemplar_idx is assigned per template in file order (0, 1, 2, ...).
    """
    batch = read_embedding_file(embeddings_path)
    mapping = read_template_map(template_map_path)
    counters: dict[str, int] = {}
    exemplars: list[TemplateExemplar] = []
    for item_id, vector in batch.entries:
        template_id = mapping.get(item_id)
        if template_id is None:
            raise BuildError(f"exemplar {item_id!r} has no entry in the template map")
        idx = counters.get(template_id, 0)
        counters[template_id] = idx + 1
        exemplars.append(TemplateExemplar(template_id=template_id, exemplar_idx=idx, vector=vector))
    return build_index(exemplars)

"""Miniature meme knowledge graph: load, traverse, and assemble context cards.

The wire format is an edge-list TSV with header `id\tnode1\tlabel\tnode2`.
Node kinds come from rdf:type rows whose object is MediaFrame, Template, or
MemeInstance. The predicate vocabulary:

    rdf:type      node kind declaration
    template_of   meme instance -> its template
    frame_of      template -> its media frame (may be absent; tolerated)
    title, about, origin, tags, alt_text      literal properties
    fromImage, fromCaption, fromAbout         entity provenance

Duplicate rows are deduplicated (set semantics). Anything outside the
vocabulary is kept as a free extension edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import FormatError, NotFoundError

KIND_MEDIA_FRAME = "MediaFrame"
KIND_TEMPLATE = "Template"
KIND_MEME_INSTANCE = "MemeInstance"
KIND_ENTITY = "Entity"
KIND_LITERAL = "Literal"
TYPED_KINDS = (KIND_MEDIA_FRAME, KIND_TEMPLATE, KIND_MEME_INSTANCE)

TYPE_PREDICATE = "rdf:type"
TEMPLATE_OF = "template_of"
FRAME_OF = "frame_of"
LITERAL_PREDICATES = frozenset({"title", "about", "origin", "tags", "alt_text"})
PROVENANCE_PREDICATES = ("fromImage", "fromCaption", "fromAbout")

_HEADER = ("id", "node1", "label", "node2")


@dataclass
class KgNode:
    node_id: str
    kind: str
    properties: dict[str, list[str]] = field(default_factory=dict)


@dataclass(frozen=True)
class KgEdge:
    subject: str
    predicate: str
    object: str


@dataclass
class MemeKg:
    nodes: dict[str, KgNode]
    edges: list[KgEdge]
    by_subject: dict[str, list[KgEdge]]
    by_pred_obj: dict[tuple[str, str], list[KgEdge]]


@dataclass(frozen=True)
class MediaFrameInfo:
    about: str
    origin: str
    tags: list[str]


@dataclass(frozen=True)
class InstanceInfo:
    instance_id: str
    alternative_text: str


@dataclass(frozen=True)
class ContextCard:
    """KG-derived summary for one template, as in the Disloyal-Boyfriend case."""

    template_id: str
    template_title: str
    media_frame: MediaFrameInfo | None
    instances: list[InstanceInfo]
    entities: dict[str, list[str]]
    frame_missing: bool

    def to_json_dict(self) -> dict:
        return {
            "template_id": self.template_id,
            "template_title": self.template_title,
            "media_frame": (
                None
                if self.media_frame is None
                else {
                    "about": self.media_frame.about,
                    "origin": self.media_frame.origin,
                    "tags": self.media_frame.tags,
                }
            ),
            "instances": [
                {"instance_id": i.instance_id, "alternative_text": i.alternative_text}
                for i in self.instances
            ],
            "entities": self.entities,
            "frame_missing": self.frame_missing,
        }


def load_kg_tsv(path: Path | str) -> MemeKg:
    """Load an edge-list TSV into an immutable-by-convention MemeKg.

    Raises FormatError with the offending 1-based file row for a missing
    header, wrong column counts, or conflicting rdf:type declarations.
    """
    rows: list[tuple[str, str, str]] = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        header_line = fh.readline()
        if not header_line:
            raise FormatError("empty KG file: missing header row")
        header = tuple(column.strip() for column in header_line.rstrip("\n").split("\t"))
        if header != _HEADER:
            raise FormatError(f"row 1: expected header {_HEADER}, got {header}")
        for number, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            columns = line.split("\t")
            if len(columns) != 4:
                raise FormatError(f"row {number}: expected 4 columns, got {len(columns)}")
            _, node1, label, node2 = columns
            if not node1 or not label:
                raise FormatError(f"row {number}: empty node1 or label")
            rows.append((node1, label, node2))

    edges: list[KgEdge] = []
    seen: set[tuple[str, str, str]] = set()
    for row in rows:
        if row not in seen:
            seen.add(row)
            edges.append(KgEdge(*row))

    kinds: dict[str, str] = {}
    for edge in edges:
        if edge.predicate == TYPE_PREDICATE and edge.object in TYPED_KINDS:
            previous = kinds.get(edge.subject)
            if previous is not None and previous != edge.object:
                raise FormatError(
                    f"node {edge.subject!r} declared both {previous} and {edge.object}"
                )
            kinds[edge.subject] = edge.object

    nodes: dict[str, KgNode] = {}

    def ensure(node_id: str, default_kind: str) -> KgNode:
        node = nodes.get(node_id)
        if node is None:
            node = KgNode(node_id=node_id, kind=kinds.get(node_id, default_kind))
            nodes[node_id] = node
        return node

    for edge in edges:
        subject = ensure(edge.subject, KIND_ENTITY)
        if edge.predicate == TYPE_PREDICATE:
            continue
        if edge.predicate in LITERAL_PREDICATES:
            subject.properties.setdefault(edge.predicate, []).append(edge.object)
        elif edge.predicate in (TEMPLATE_OF, FRAME_OF):
            ensure(edge.object, KIND_ENTITY)
        elif edge.predicate in PROVENANCE_PREDICATES:
            ensure(edge.object, KIND_ENTITY)
        else:
            ensure(edge.object, KIND_LITERAL)
    for node_id in kinds:
        ensure(node_id, KIND_ENTITY)

    by_subject: dict[str, list[KgEdge]] = {}
    by_pred_obj: dict[tuple[str, str], list[KgEdge]] = {}
    for edge in edges:
        by_subject.setdefault(edge.subject, []).append(edge)
        by_pred_obj.setdefault((edge.predicate, edge.object), []).append(edge)
    return MemeKg(nodes=nodes, edges=edges, by_subject=by_subject, by_pred_obj=by_pred_obj)


def write_kg_tsv(kg: MemeKg, path: Path | str) -> None:
    """Serialize a graph back to the TSV form (rows sorted, ids synthesized)."""
    ordered = sorted(kg.edges, key=lambda e: (e.subject, e.predicate, e.object))
    lines = ["\t".join(_HEADER)]
    for number, edge in enumerate(ordered, start=1):
        lines.append(f"E{number:06d}\t{edge.subject}\t{edge.predicate}\t{edge.object}")
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def templates(kg: MemeKg) -> list[str]:
    """Sorted node ids of every Template in the graph."""
    return sorted(n.node_id for n in kg.nodes.values() if n.kind == KIND_TEMPLATE)


def _require_template(kg: MemeKg, template_id: str) -> KgNode:
    node = kg.nodes.get(template_id)
    if node is None or node.kind != KIND_TEMPLATE:
        raise NotFoundError(f"no template named {template_id!r}")
    return node


def instances_of(kg: MemeKg, template_id: str) -> list[str]:
    """Sorted MemeInstance ids linked to the template via template_of."""
    _require_template(kg, template_id)
    members = kg.by_pred_obj.get((TEMPLATE_OF, template_id), [])
    return sorted(
        e.subject
        for e in members
        if kg.nodes[e.subject].kind == KIND_MEME_INSTANCE
    )


def media_frame_of(kg: MemeKg, template_id: str) -> KgNode | None:
    """The template's MediaFrame node, or None when the link is missing."""
    _require_template(kg, template_id)
    frames = sorted(
        e.object for e in kg.by_subject.get(template_id, []) if e.predicate == FRAME_OF
    )
    if not frames:
        return None
    return kg.nodes[frames[0]]


def _first(node: KgNode, predicate: str) -> str:
    values = node.properties.get(predicate)
    return values[0] if values else ""


def context_card(kg: MemeKg, template_id: str) -> ContextCard:
    """Assemble the contextual summary for a template.

    Entities are collected from provenance edges anywhere in the template's
    subgraph (the template itself, its instances, and its frame when
    linked), grouped by provenance predicate; a missing frame is reported
    via frame_missing rather than an error.
    """
    template = _require_template(kg, template_id)
    frame = media_frame_of(kg, template_id)
    instance_ids = instances_of(kg, template_id)

    title = _first(template, "title")
    if not title:
        title = template_id.rsplit("/", 1)[-1]

    subgraph = [template_id, *instance_ids]
    if frame is not None:
        subgraph.append(frame.node_id)
    entities: dict[str, list[str]] = {}
    for provenance in PROVENANCE_PREDICATES:
        labels: set[str] = set()
        for node_id in subgraph:
            for edge in kg.by_subject.get(node_id, []):
                if edge.predicate == provenance:
                    labels.add(edge.object)
        if labels:
            entities[provenance] = sorted(labels)

    return ContextCard(
        template_id=template_id,
        template_title=title,
        media_frame=(
            None
            if frame is None
            else MediaFrameInfo(
                about=_first(frame, "about"),
                origin=_first(frame, "origin"),
                tags=list(frame.properties.get("tags", [])),
            )
        ),
        instances=[
            InstanceInfo(instance_id=i, alternative_text=_first(kg.nodes[i], "alt_text"))
            for i in instance_ids
        ],
        entities=entities,
        frame_missing=frame is None,
    )

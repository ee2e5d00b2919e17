"""Service wire schema: JSON encoding of analyzed papers.

One document looks like::

    {"id": "...",
     "entities": [{"offset": 24, "length": 28, "text": "...",
                   "category": "Diagnosis", "confidenceScore": 0.98,
                   "isNegated": false,
                   "links": [{"dataSource": "UMLS", "id": "C5203670"}]}],
     "relations": [{"relationType": "Abbreviation", "bidirectional": true,
                    "source": "#/results/documents/0/entities/0",
                    "target": "#/results/documents/0/entities/1"}]}

The store persists the same shape plus ``title`` and ``publish_time``.
Relation endpoints are JSON-pointer strings on the wire and plain entity
indices in memory. A pointer that does not match the ``#/results/...``
format fails the whole document; a well-formed pointer whose entity index
falls outside the (possibly truncated) entity list drops just that
relation.
"""

from __future__ import annotations

import json
import re
from typing import Any

from .errors import WireFormatError
from .model import (
    AnalyzedPaper,
    EntityLink,
    HealthEntity,
    HealthRelation,
    PaperRecord,
    PartialDate,
    sorted_entities,
)

_POINTER_RE = re.compile(r"^#/results/documents/(\d+)/entities/(\d+)$")


def _entity_from_wire(obj: dict, where: str) -> HealthEntity:
    try:
        offset = int(obj["offset"])
        length = int(obj["length"])
        text = obj["text"]
        category = obj["category"]
    except (KeyError, TypeError, ValueError) as exc:
        raise WireFormatError(f"{where}: missing or malformed entity field: {exc}") from exc
    links = []
    for l in obj.get("links", ()):
        try:
            links.append(EntityLink(l["dataSource"], l["id"]))
        except (KeyError, TypeError) as exc:
            raise WireFormatError(f"{where}: malformed link: {exc}") from exc
    return HealthEntity(
        offset=offset,
        length=length,
        text=text,
        category=category,
        confidence=float(obj.get("confidenceScore", 1.0)),
        is_negated=bool(obj.get("isNegated", False)),
        links=tuple(links),
    )


def resolve_pointer(pointer: str) -> int:
    """Entity index encoded in a relation pointer string."""
    m = _POINTER_RE.match(pointer)
    if not m:
        raise WireFormatError(f"malformed relation pointer {pointer!r}")
    return int(m.group(2))


def _endpoint_index(value: Any, where: str) -> int:
    if isinstance(value, str):
        return resolve_pointer(value)
    raise WireFormatError(f"{where}: relation endpoint must be a pointer string, got {value!r}")


def paper_from_wire(
    obj: dict,
    meta: PaperRecord | None = None,
    source_text: str | None = None,
) -> AnalyzedPaper:
    """Decode one wire document into an AnalyzedPaper.

    `meta`, when given, supplies title/publish_time (and the abstract used
    to re-anchor offsets when the service's text does not line up with the
    claimed span). Dangling relations (index past the entity list) are
    dropped; malformed pointers raise WireFormatError.
    """
    if not isinstance(obj, dict):
        raise WireFormatError(f"document must be a JSON object, got {type(obj).__name__}")
    doc_id = obj.get("id") or (meta.cord_uid if meta else None)
    if not doc_id:
        raise WireFormatError("document has no id")
    where = f"document {doc_id}"

    entities = [_entity_from_wire(e, where) for e in obj.get("entities", ())]
    if source_text is None and meta is not None:
        source_text = meta.abstract
    if source_text:
        entities = [_anchor_offset(e, source_text) for e in entities]

    relations: list[HealthRelation] = []
    n = len(entities)
    for r in obj.get("relations", ()):
        try:
            rel_type = r["relationType"]
            bidirectional = bool(r.get("bidirectional", False))
            src = _endpoint_index(r["source"], where)
            tgt = _endpoint_index(r["target"], where)
        except KeyError as exc:
            raise WireFormatError(f"{where}: relation missing field {exc}") from exc
        if src >= n or tgt >= n or src == tgt:
            continue
        relations.append(HealthRelation(rel_type, bidirectional, src, tgt))

    ents, rels = sorted_entities(entities, relations)
    title = obj.get("title") or (meta.title if meta else "")
    publish_time = None
    if obj.get("publish_time"):
        publish_time = PartialDate.parse(obj["publish_time"])
    elif meta is not None:
        publish_time = meta.publish_time
    paper = AnalyzedPaper(
        id=doc_id, title=title, publish_time=publish_time, entities=ents, relations=rels
    )
    paper.validate()
    return paper


def _anchor_offset(entity: HealthEntity, source: str) -> HealthEntity:
    """Re-locate an entity whose claimed span does not spell its text.

    Handles backends that count offsets in a different unit: the span is
    moved to the occurrence of the entity text nearest the claimed offset.
    """
    lo_src = source.lower()
    lo_text = entity.text.lower()
    claimed = source[entity.offset : entity.offset + entity.length]
    if claimed.lower() == lo_text:
        return entity
    positions = []
    start = lo_src.find(lo_text)
    while start != -1:
        positions.append(start)
        start = lo_src.find(lo_text, start + 1)
    if not positions:
        return entity
    best = min(positions, key=lambda p: abs(p - entity.offset))
    return HealthEntity(
        offset=best,
        length=len(entity.text),
        text=entity.text,
        category=entity.category,
        confidence=entity.confidence,
        is_negated=entity.is_negated,
        links=entity.links,
    )


def parse_result_json(raw: bytes | str, meta: PaperRecord | None = None) -> AnalyzedPaper:
    """Parse one wire-schema document from raw JSON bytes."""
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise WireFormatError(f"invalid JSON: {exc}") from exc
    return paper_from_wire(obj, meta=meta)


def paper_to_wire(
    paper: AnalyzedPaper, doc_index: int = 0, include_meta: bool = False
) -> dict:
    """Encode a paper as a wire-schema document object."""
    obj: dict = {"id": paper.id}
    if include_meta:
        obj["title"] = paper.title
        if paper.publish_time is not None:
            obj["publish_time"] = str(paper.publish_time)
    obj["entities"] = [_entity_wire_fields(e) for e in paper.entities]
    obj["relations"] = [
        {
            "relationType": r.relation_type,
            "bidirectional": r.bidirectional,
            "source": f"#/results/documents/{doc_index}/entities/{r.source}",
            "target": f"#/results/documents/{doc_index}/entities/{r.target}",
        }
        for r in paper.relations
    ]
    return obj


def _entity_wire_fields(e: HealthEntity) -> dict:
    obj: dict = {
        "offset": e.offset,
        "length": e.length,
        "text": e.text,
        "category": e.category,
        "confidenceScore": e.confidence,
        "isNegated": e.is_negated,
    }
    if e.links:
        obj["links"] = [{"dataSource": l.data_source, "id": l.id} for l in e.links]
    return obj


def serialize_result_json(paper: AnalyzedPaper, doc_index: int = 0) -> bytes:
    """Wire-schema JSON bytes for one paper (no store metadata)."""
    return json.dumps(paper_to_wire(paper, doc_index=doc_index), ensure_ascii=False).encode("utf-8")


def store_line(paper: AnalyzedPaper) -> str:
    """One JSONL line as persisted by the document store (metadata included)."""
    return json.dumps(paper_to_wire(paper, include_meta=True), ensure_ascii=False)


def paper_from_store_line(line: str) -> AnalyzedPaper:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise WireFormatError(f"invalid JSONL line: {exc}") from exc
    return paper_from_wire(obj)

"""Domain types: paper records, extracted entities, relations, analyzed papers.

Offsets and lengths everywhere count Unicode code points of the source
text, never bytes.
"""

from __future__ import annotations

import datetime as _dt
import re
from dataclasses import dataclass, replace

from .errors import ValidationError

# The 26 entity categories reported by the health analysis service.
CATEGORIES: tuple[str, ...] = (
    "AdministrativeEvent",
    "Age",
    "BodyStructure",
    "CareEnvironment",
    "ConditionQualifier",
    "Date",
    "Diagnosis",
    "Direction",
    "Dosage",
    "ExaminationName",
    "FamilyRelation",
    "Frequency",
    "Gender",
    "GeneOrProtein",
    "HealthcareProfession",
    "MeasurementUnit",
    "MeasurementValue",
    "MedicationClass",
    "MedicationForm",
    "MedicationName",
    "MedicationRoute",
    "RelationalOperator",
    "SymptomOrSign",
    "Time",
    "TreatmentName",
    "Variant",
)

KNOWN_CATEGORIES = frozenset(CATEGORIES)


def is_known_category(label: str) -> bool:
    return label in KNOWN_CATEGORIES


_DATE_RE = re.compile(r"^(\d{4})(?:-(\d{2})(?:-(\d{2}))?)?$")


@dataclass(frozen=True, order=False)
class PartialDate:
    """Calendar date with optional month/day precision.

    A bare year is representable ("2020"); `month_known` distinguishes it
    from a full date when binning by month.
    """

    year: int
    month: int | None = None
    day: int | None = None

    @property
    def month_known(self) -> bool:
        return self.month is not None

    @staticmethod
    def parse(raw: str) -> "PartialDate | None":
        """Parse YYYY, YYYY-MM or YYYY-MM-DD; anything else yields None."""
        m = _DATE_RE.match(raw.strip())
        if not m:
            return None
        year = int(m.group(1))
        month = int(m.group(2)) if m.group(2) else None
        day = int(m.group(3)) if m.group(3) else None
        if month is not None and not 1 <= month <= 12:
            return None
        if day is not None:
            try:
                _dt.date(year, month, day)
            except ValueError:
                return None
        return PartialDate(year, month, day)

    def sort_key(self) -> tuple[int, int, int]:
        # Unknown month/day sort before any known one within the same year.
        return (self.year, self.month or 0, self.day or 0)

    def __str__(self) -> str:
        if self.month is None:
            return f"{self.year:04d}"
        if self.day is None:
            return f"{self.year:04d}-{self.month:02d}"
        return f"{self.year:04d}-{self.month:02d}-{self.day:02d}"


@dataclass(frozen=True)
class PaperRecord:
    """One row of the corpus metadata file."""

    cord_uid: str
    title: str
    abstract: str
    journal: str | None = None
    authors: str | None = None
    publish_time: PartialDate | None = None
    doi: str | None = None

    def __post_init__(self):
        if not self.cord_uid:
            raise ValidationError("cord_uid must be non-empty")


@dataclass(frozen=True)
class EntityLink:
    """Reference into a medical ontology, e.g. ("UMLS", "C0020336")."""

    data_source: str
    id: str

    def __post_init__(self):
        if not self.data_source or not self.id:
            raise ValidationError("entity link fields must be non-empty")


@dataclass(frozen=True)
class HealthEntity:
    """One extracted span of the source text."""

    offset: int
    length: int
    text: str
    category: str
    confidence: float = 1.0
    is_negated: bool = False
    links: tuple[EntityLink, ...] = ()

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence {self.confidence} outside [0, 1]")
        if self.offset < 0 or self.length < 0:
            raise ValidationError("offset and length must be nonnegative")

    @property
    def end(self) -> int:
        return self.offset + self.length

    def umls_id(self) -> str | None:
        """Id of the first UMLS link, if any."""
        for link in self.links:
            if link.data_source == "UMLS":
                return link.id
        return None


@dataclass(frozen=True)
class HealthRelation:
    """Typed edge between two entities of the same paper.

    `source` and `target` index into the owning paper's entity list.
    """

    relation_type: str
    bidirectional: bool
    source: int
    target: int

    def __post_init__(self):
        if self.source == self.target:
            raise ValidationError("relation endpoints must differ")


@dataclass(frozen=True)
class AnalyzedPaper:
    """A paper with its extracted entities and relations (the stored unit)."""

    id: str
    title: str
    publish_time: PartialDate | None = None
    entities: tuple[HealthEntity, ...] = ()
    relations: tuple[HealthRelation, ...] = ()

    def validate(self) -> None:
        if not self.id:
            raise ValidationError("paper id must be non-empty")
        offsets = [e.offset for e in self.entities]
        if offsets != sorted(offsets):
            raise ValidationError("entities must be sorted by offset")
        n = len(self.entities)
        for rel in self.relations:
            if not (0 <= rel.source < n and 0 <= rel.target < n):
                raise ValidationError(
                    f"relation {rel.relation_type} references entity out of range"
                )

    def to_document(self) -> dict:
        """Plain-JSON view used by the query engine.

        Field names follow the wire schema (isNegated, dataSource, ...).
        Relation endpoints are materialized as the referenced entity objects
        so that paths like `r.source.text` resolve.
        """
        entities = [_entity_to_json(e) for e in self.entities]
        doc: dict = {"id": self.id, "title": self.title}
        if self.publish_time is not None:
            doc["publish_time"] = str(self.publish_time)
        doc["entities"] = entities
        doc["relations"] = [
            {
                "relationType": r.relation_type,
                "bidirectional": r.bidirectional,
                "source": entities[r.source],
                "target": entities[r.target],
            }
            for r in self.relations
        ]
        return doc


def _entity_to_json(e: HealthEntity) -> dict:
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


def sorted_entities(
    entities: list[HealthEntity], relations: list[HealthRelation]
) -> tuple[tuple[HealthEntity, ...], tuple[HealthRelation, ...]]:
    """Sort entities by offset and remap relation indices accordingly."""
    order = sorted(range(len(entities)), key=lambda i: (entities[i].offset, entities[i].length))
    remap = {old: new for new, old in enumerate(order)}
    sorted_ents = tuple(entities[i] for i in order)
    remapped = tuple(replace(r, source=remap[r.source], target=remap[r.target]) for r in relations)
    return sorted_ents, remapped


def entity_term_key(entity: HealthEntity) -> str:
    """Stable identity of a term: its UMLS id, else its case-folded surface."""
    cui = entity.umls_id()
    if cui is not None:
        return cui
    return "text:" + entity.text.casefold()

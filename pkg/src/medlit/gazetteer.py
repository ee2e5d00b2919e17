"""Term dictionary backing the local entity extractor.

The file format is UTF-8 TSV with three columns:
``surface<TAB>category<TAB>umls_id`` (umls_id may be empty). Matching is
case-insensitive; entries keep their original surface for reference.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .errors import ValidationError
from .model import EntityLink


@dataclass(frozen=True)
class GazetteerEntry:
    surface: str
    category: str
    umls_id: str | None = None
    extra_links: tuple[EntityLink, ...] = ()

    def __post_init__(self):
        if not self.surface:
            raise ValidationError("gazetteer surface must be non-empty")

    def links(self) -> tuple[EntityLink, ...]:
        out: list[EntityLink] = []
        if self.umls_id:
            out.append(EntityLink("UMLS", self.umls_id))
        out.extend(self.extra_links)
        return tuple(out)


def parse_gazetteer(lines: Iterable[str]) -> list[GazetteerEntry]:
    entries: list[GazetteerEntry] = []
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ValidationError(f"gazetteer line {lineno}: expected at least 2 tab-separated fields")
        surface, category = parts[0], parts[1]
        umls_id = parts[2] if len(parts) > 2 and parts[2] else None
        entries.append(GazetteerEntry(surface=surface, category=category, umls_id=umls_id))
    return entries


def load_gazetteer(path: str | Path) -> list[GazetteerEntry]:
    with open(path, encoding="utf-8") as fh:
        return parse_gazetteer(fh)


def bundled_gazetteer() -> list[GazetteerEntry]:
    """The seed dictionary shipped with the package."""
    text = importlib.resources.files("medlit.data").joinpath("seed_gazetteer.tsv").read_text("utf-8")
    return parse_gazetteer(text.splitlines())

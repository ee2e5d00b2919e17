"""Local entity extraction: gazetteer matching, negation, abbreviation pairing.

This is the offline stand-in for the hosted health-NER model. It is a pure
function of (text, gazetteer, trigger configuration): matching is
case-insensitive, word-boundary aligned, longest-match-wins, scanning left
to right, and matched spans never overlap.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from typing import Sequence

from .gazetteer import GazetteerEntry
from .model import HealthEntity, HealthRelation

DEFAULT_NEGATION_TRIGGERS = (
    "no",
    "not",
    "without",
    "never",
    "negative for",
    "did not",
)

# Negation scope: a trigger negates an entity in the same clause when it
# sits within this many word tokens before/after the entity.
DEFAULT_WINDOW_BEFORE = 6
DEFAULT_WINDOW_AFTER = 3

_WORD_RE = re.compile(r"[0-9A-Za-z]+")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?]")
_BUT_CLAUSE_RE = re.compile(r",\s*(?=but\b)", re.IGNORECASE)


@dataclass(frozen=True)
class NegationConfig:
    triggers: tuple[str, ...] = DEFAULT_NEGATION_TRIGGERS
    window_before: int = DEFAULT_WINDOW_BEFORE
    window_after: int = DEFAULT_WINDOW_AFTER


def _is_boundary(text: str, pos: int) -> bool:
    if pos <= 0 or pos >= len(text):
        return True
    return text[pos - 1].isalnum() != text[pos].isalnum()


def _match_spans(text: str, gazetteer: Sequence[GazetteerEntry]) -> list[tuple[int, int, GazetteerEntry]]:
    """Maximal non-overlapping matches, longest first at each position."""
    table: dict[str, GazetteerEntry] = {}
    for entry in gazetteer:
        table.setdefault(entry.surface.lower(), entry)
    lengths = sorted({len(s) for s in table}, reverse=True)
    lower = text.lower()
    spans: list[tuple[int, int, GazetteerEntry]] = []
    i = 0
    n = len(text)
    while i < n:
        if not _is_boundary(text, i):
            i += 1
            continue
        hit = None
        for length in lengths:
            end = i + length
            if end > n:
                continue
            candidate = lower[i:end]
            entry = table.get(candidate)
            if entry is not None and _is_boundary(text, end):
                hit = (i, end, entry)
                break
        if hit is None:
            i += 1
        else:
            spans.append(hit)
            i = hit[1]
    return spans


def analyze_local(
    text: str,
    gazetteer: Sequence[GazetteerEntry],
    negation: NegationConfig = NegationConfig(),
) -> tuple[tuple[HealthEntity, ...], tuple[HealthRelation, ...]]:
    """Extract entities and abbreviation relations from `text`.

    Exact gazetteer matches get confidence 1.0. Empty text yields empty
    output. Entities come back sorted by offset.
    """
    if not text:
        return (), ()
    entities = [
        HealthEntity(
            offset=start,
            length=end - start,
            text=text[start:end],
            category=entry.category,
            confidence=1.0,
            links=entry.links(),
        )
        for start, end, entry in _match_spans(text, gazetteer)
    ]
    entities = detect_negation(text, entities, negation)
    relations = detect_abbreviations(text, entities)
    return tuple(entities), tuple(relations)


def _clause_spans(text: str) -> list[tuple[int, int]]:
    """Spans of negation-scope clauses: sentences split again at ", but"."""
    spans: list[tuple[int, int]] = []
    start = 0
    for m in _SENTENCE_SPLIT_RE.finditer(text):
        spans.append((start, m.start()))
        start = m.end()
    spans.append((start, len(text)))
    out: list[tuple[int, int]] = []
    for s, e in spans:
        cstart = s
        for m in _BUT_CLAUSE_RE.finditer(text, s, e):
            out.append((cstart, m.start()))
            cstart = m.end()
        out.append((cstart, e))
    return out


def detect_negation(
    text: str,
    entities: Sequence[HealthEntity],
    config: NegationConfig = NegationConfig(),
) -> list[HealthEntity]:
    """Set is_negated on entities in the scope of a negation trigger.

    A trigger applies when it falls in the same clause as the entity and
    within `window_before` word tokens before it or `window_after` after.
    Clause boundaries are the sentence terminators . ! ? plus a comma
    directly followed by "but".
    """
    if not entities:
        return []
    clauses = _clause_spans(text)
    trigger_seqs = [tuple(t.lower().split()) for t in config.triggers]

    out: list[HealthEntity] = []
    for ent in entities:
        clause = next(((s, e) for s, e in clauses if s <= ent.offset < e), (0, len(text)))
        tokens = list(_WORD_RE.finditer(text, clause[0], clause[1]))
        words = [t.group(0).lower() for t in tokens]
        # Token range covered by the entity span.
        covered = [
            k for k, t in enumerate(tokens) if t.start() < ent.end and t.end() > ent.offset
        ]
        if not covered:
            out.append(ent)
            continue
        first_tok, last_tok = covered[0], covered[-1]
        negated = False
        for seq in trigger_seqs:
            w = len(seq)
            for k in range(len(words) - w + 1):
                if tuple(words[k : k + w]) != seq:
                    continue
                trig_first, trig_last = k, k + w - 1
                if trig_last < first_tok and first_tok - trig_last <= config.window_before:
                    negated = True
                elif trig_first > last_tok and trig_first - last_tok <= config.window_after:
                    negated = True
                if negated:
                    break
            if negated:
                break
        out.append(replace(ent, is_negated=negated) if negated != ent.is_negated else ent)
    return out


def detect_abbreviations(
    text: str, entities: Sequence[HealthEntity]
) -> list[HealthRelation]:
    """Pair a term with its parenthesized short form right after it.

    For entities LONG and SHORT, a bidirectional Abbreviation relation is
    emitted when SHORT starts within two characters after a "(" that
    directly follows LONG (only whitespace in between), both share the
    category, and their UMLS ids agree whenever both are linked.
    """
    relations: list[HealthRelation] = []
    n = len(text)
    for i, long_ent in enumerate(entities):
        pos = long_ent.end
        while pos < n and text[pos] in " \t":
            pos += 1
        if pos >= n or text[pos] != "(":
            continue
        open_paren = pos
        for j, short_ent in enumerate(entities):
            if j == i:
                continue
            if not open_paren < short_ent.offset <= open_paren + 3:
                continue
            if short_ent.category != long_ent.category:
                continue
            long_cui, short_cui = long_ent.umls_id(), short_ent.umls_id()
            if long_cui and short_cui and long_cui != short_cui:
                continue
            relations.append(
                HealthRelation(
                    relation_type="Abbreviation",
                    bidirectional=True,
                    source=i,
                    target=j,
                )
            )
            break
    return relations

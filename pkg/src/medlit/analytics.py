"""Corpus-level aggregation over analyzed papers.

Everything here is a pure function of the paper snapshot passed in, so
rerunning over the same store yields identical output bytes. Terms are
identified by UMLS id when a mention is linked and by the case-folded
surface (prefixed ``text:``) when it is not.
"""

from __future__ import annotations

import json
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .model import AnalyzedPaper, PartialDate, entity_term_key


@dataclass(frozen=True)
class MentionRecord:
    """One entity occurrence with the paper context needed for analytics."""

    text: str
    is_negated: bool
    title: str
    publish_time: PartialDate | None
    umls_id: str | None

    @property
    def term_key(self) -> str:
        return self.umls_id if self.umls_id else "text:" + self.text.casefold()


@dataclass(frozen=True)
class OntologyTermStats:
    umls_id: str  # term key: a CUI, or "text:<folded surface>" when unlinked
    name: str
    mention_count: int
    negated_count: int

    @property
    def negativity(self) -> float:
        return self.negated_count / self.mention_count


@dataclass(frozen=True)
class MonthlySeries:
    term_key: str
    points: tuple[tuple[str, int], ...]  # ("YYYY-MM", count), months contiguous


@dataclass(frozen=True)
class ShareTable:
    months: tuple[str, ...]
    term_keys: tuple[str, ...]
    shares: tuple[tuple[float, ...], ...]  # one row per term key
    zero_months: tuple[str, ...]


@dataclass(frozen=True)
class TermSpec:
    """A term for co-occurrence counting: key, display label, surface set."""

    key: str
    label: str
    surfaces: frozenset[str] = frozenset()


@dataclass(frozen=True)
class CooccurrenceMatrix:
    row_terms: tuple[str, ...]
    col_terms: tuple[str, ...]
    counts: np.ndarray  # ints, shape (len(row_terms), len(col_terms))
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.row_labels:
            object.__setattr__(self, "row_labels", self.row_terms)
        if not self.col_labels:
            object.__setattr__(self, "col_labels", self.col_terms)


def extract_mentions(papers: Iterable[AnalyzedPaper], category: str) -> list[MentionRecord]:
    """One record per entity of `category`; umls_id comes from the first UMLS link."""
    mentions = []
    for paper in papers:
        for entity in paper.entities:
            if entity.category != category:
                continue
            mentions.append(
                MentionRecord(
                    text=entity.text,
                    is_negated=entity.is_negated,
                    title=paper.title,
                    publish_time=paper.publish_time,
                    umls_id=entity.umls_id(),
                )
            )
    return mentions


def rollup(mentions: Sequence[MentionRecord], drop_unlinked: bool = False) -> list[OntologyTermStats]:
    """Group mentions by term key; sort by mention count descending.

    The canonical name of a group is its most frequent original-case
    surface form (first encountered wins ties). `drop_unlinked` discards
    mentions without an ontology id instead of grouping them by surface.
    """
    counts: dict[str, int] = defaultdict(int)
    negated: dict[str, int] = defaultdict(int)
    surface_counts: dict[str, Counter] = defaultdict(Counter)
    surface_first: dict[str, dict[str, int]] = defaultdict(dict)
    order = 0
    for m in mentions:
        if drop_unlinked and not m.umls_id:
            continue
        key = m.term_key
        counts[key] += 1
        if m.is_negated:
            negated[key] += 1
        surface_counts[key][m.text] += 1
        surface_first[key].setdefault(m.text, order)
        order += 1

    stats = []
    for key, count in counts.items():
        surfaces = surface_counts[key]
        name = max(surfaces, key=lambda s: (surfaces[s], -surface_first[key][s]))
        stats.append(
            OntologyTermStats(
                umls_id=key,
                name=name,
                mention_count=count,
                negated_count=negated[key],
            )
        )
    stats.sort(key=lambda s: (-s.mention_count, s.umls_id))
    return stats


def _month_index(date: PartialDate) -> int:
    return date.year * 12 + (date.month - 1)


def _month_label(index: int) -> str:
    return f"{index // 12:04d}-{index % 12 + 1:02d}"


def monthly_series(
    mentions: Sequence[MentionRecord], term_key: str
) -> tuple[MonthlySeries, int]:
    """Mentions of one term bucketed per calendar month.

    Months between the first and last observed one are materialized with
    zero counts. Mentions without a month-precise date are excluded;
    their number is returned as the second element.
    """
    selected = [m for m in mentions if m.term_key == term_key]
    dated = [m for m in selected if m.publish_time is not None and m.publish_time.month_known]
    skipped = len(selected) - len(dated)
    if not dated:
        return MonthlySeries(term_key, ()), skipped
    buckets: Counter = Counter(_month_index(m.publish_time) for m in dated)
    lo, hi = min(buckets), max(buckets)
    points = tuple((_month_label(i), buckets.get(i, 0)) for i in range(lo, hi + 1))
    return MonthlySeries(term_key, points), skipped


def align_series(series: Sequence[MonthlySeries]) -> list[MonthlySeries]:
    """Re-span every series onto the union of observed months."""
    indices = [
        _month_index(PartialDate(int(m[:4]), int(m[5:7])))
        for s in series
        for m, _ in s.points
    ]
    if not indices:
        return [MonthlySeries(s.term_key, ()) for s in series]
    lo, hi = min(indices), max(indices)
    out = []
    for s in series:
        existing = dict(s.points)
        points = tuple(
            (_month_label(i), existing.get(_month_label(i), 0)) for i in range(lo, hi + 1)
        )
        out.append(MonthlySeries(s.term_key, points))
    return out


def relative_shares(series: Sequence[MonthlySeries]) -> ShareTable:
    """Per-month share of each term among the given (span-aligned) series.

    A month where every term has zero mentions gets all-zero shares and is
    flagged; every other month's shares sum to 1.
    """
    if not series:
        return ShareTable((), (), (), ())
    months = tuple(m for m, _ in series[0].points)
    for s in series:
        if tuple(m for m, _ in s.points) != months:
            raise ValueError("series must be span-aligned; use align_series() first")
    counts = np.array([[c for _, c in s.points] for s in series], dtype=float)
    totals = counts.sum(axis=0)
    shares = np.zeros_like(counts)
    nonzero = totals > 0
    shares[:, nonzero] = counts[:, nonzero] / totals[nonzero]
    zero_months = tuple(m for m, z in zip(months, nonzero) if not z)
    return ShareTable(
        months=months,
        term_keys=tuple(s.term_key for s in series),
        shares=tuple(tuple(row) for row in shares),
        zero_months=zero_months,
    )


def _paper_term_counts(paper: AnalyzedPaper, terms: Sequence[TermSpec]) -> np.ndarray:
    counts = np.zeros(len(terms), dtype=np.int64)
    for entity in paper.entities:
        key = entity_term_key(entity)
        folded = entity.text.casefold()
        for i, term in enumerate(terms):
            if key == term.key or folded in term.surfaces:
                counts[i] += 1
    return counts


def cooccurrence(
    papers: Iterable[AnalyzedPaper],
    terms_a: Sequence[TermSpec],
    terms_b: Sequence[TermSpec],
    binary: bool = True,
) -> CooccurrenceMatrix:
    """Papers mentioning term i (rows) and term j (cols) together.

    Binary counting (the default) counts each paper at most once per cell
    regardless of how often either term occurs in the abstract. With
    `binary=False` a paper contributes the product of its two mention
    counts instead.
    """
    if not all(t.surfaces or t.key for t in (*terms_a, *terms_b)):
        raise ValueError("every term needs a key or a non-empty surface set")
    counts = np.zeros((len(terms_a), len(terms_b)), dtype=np.int64)
    for paper in papers:
        a = _paper_term_counts(paper, terms_a)
        b = _paper_term_counts(paper, terms_b)
        if binary:
            counts += np.outer(a > 0, b > 0).astype(np.int64)
        else:
            counts += np.outer(a, b)
    return CooccurrenceMatrix(
        row_terms=tuple(t.key for t in terms_a),
        col_terms=tuple(t.key for t in terms_b),
        counts=counts,
        row_labels=tuple(t.label for t in terms_a),
        col_labels=tuple(t.label for t in terms_b),
    )


def top_term_specs(
    papers: Iterable[AnalyzedPaper], category: str, n: int, drop_unlinked: bool = False
) -> list[TermSpec]:
    """Top-n terms of a category by mention count, as co-occurrence specs."""
    mentions = extract_mentions(papers, category)
    groups: dict[str, set[str]] = defaultdict(set)
    for m in mentions:
        if drop_unlinked and not m.umls_id:
            continue
        groups[m.term_key].add(m.text.casefold())
    stats = rollup(mentions, drop_unlinked=drop_unlinked)
    return [
        TermSpec(key=s.umls_id, label=s.name, surfaces=frozenset(groups[s.umls_id]))
        for s in stats[:n]
    ]


def sankey_export(matrix: CooccurrenceMatrix, top_n: int | None = None) -> dict:
    """Node/link lists for a two-category flow diagram.

    Nodes are the top_n row terms plus top_n column terms by marginal
    count; links are the nonzero cells between selected nodes. Ordering is
    deterministic: count descending, then key.
    """
    counts = matrix.counts
    row_marginals = counts.sum(axis=1)
    col_marginals = counts.sum(axis=0)

    def select(keys, marginals):
        ranked = sorted(range(len(keys)), key=lambda i: (-int(marginals[i]), keys[i]))
        if top_n is not None:
            ranked = ranked[:top_n]
        return ranked

    rows = select(matrix.row_terms, row_marginals)
    cols = select(matrix.col_terms, col_marginals)

    nodes = [
        {
            "key": matrix.row_terms[i],
            "label": matrix.row_labels[i],
            "side": "row",
            "total": int(row_marginals[i]),
        }
        for i in rows
    ] + [
        {
            "key": matrix.col_terms[j],
            "label": matrix.col_labels[j],
            "side": "col",
            "total": int(col_marginals[j]),
        }
        for j in cols
    ]
    links = [
        {
            "source": matrix.row_terms[i],
            "target": matrix.col_terms[j],
            "value": int(counts[i, j]),
        }
        for i in rows
        for j in cols
        if counts[i, j] > 0
    ]
    links.sort(key=lambda l: (-l["value"], l["source"], l["target"]))
    return {"nodes": nodes, "links": links}


def chord_export(matrix: CooccurrenceMatrix) -> dict:
    """Square same-category matrix with the diagonal zeroed, plus labels."""
    if matrix.row_terms != matrix.col_terms:
        raise ValueError("chord export needs identical row and column terms")
    counts = matrix.counts.copy()
    np.fill_diagonal(counts, 0)
    return {
        "keys": list(matrix.row_terms),
        "labels": list(matrix.row_labels),
        "matrix": counts.tolist(),
    }


def timeseries_export(series: MonthlySeries, skipped: int) -> dict:
    return {
        "term_key": series.term_key,
        "points": [{"month": m, "count": c} for m, c in series.points],
        "skipped": skipped,
    }


def shares_export(table: ShareTable) -> dict:
    return {
        "months": list(table.months),
        "terms": list(table.term_keys),
        "shares": [list(row) for row in table.shares],
        "zero_months": list(table.zero_months),
    }


def cooccurrence_export(matrix: CooccurrenceMatrix) -> dict:
    return {
        "row_terms": list(matrix.row_terms),
        "row_labels": list(matrix.row_labels),
        "col_terms": list(matrix.col_terms),
        "col_labels": list(matrix.col_labels),
        "counts": matrix.counts.tolist(),
    }


def export_bytes(obj: dict) -> bytes:
    """Canonical JSON bytes shared by the CLI exporter and the HTTP API."""
    return (json.dumps(obj, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def matrix_csv(matrix: CooccurrenceMatrix) -> str:
    import csv as _csv
    import io as _io

    buf = _io.StringIO()
    writer = _csv.writer(buf)
    writer.writerow(["", *matrix.col_labels])
    for label, row in zip(matrix.row_labels, matrix.counts.tolist()):
        writer.writerow([label, *row])
    return buf.getvalue()

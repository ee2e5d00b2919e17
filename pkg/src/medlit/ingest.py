"""Corpus metadata ingestion: CSV parsing, deduplication, shard membership.

All functions here are pure over their inputs and safe to call from any
number of concurrent workers.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Sequence

from .errors import IngestError
from .model import PaperRecord, PartialDate

MANDATORY_COLUMNS = ("cord_uid", "title", "abstract", "publish_time")
OPTIONAL_COLUMNS = ("journal", "authors", "doi")


@dataclass
class IngestResult:
    records: list[PaperRecord]
    dropped_empty_id: int

    def __iter__(self):
        return iter(self.records)

    def __len__(self):
        return len(self.records)


def parse_metadata(source: BinaryIO | bytes) -> IngestResult:
    """Parse a metadata CSV stream into paper records.

    The header must contain at least cord_uid, title, abstract and
    publish_time; extra columns are ignored. Rows keep file order.
    Unparseable dates become ``publish_time=None`` (the row is kept);
    rows with an empty cord_uid are dropped and counted.

    Raises IngestError on a missing mandatory column or undecodable bytes.
    """
    if isinstance(source, (bytes, bytearray)):
        source = io.BytesIO(source)
    text = io.TextIOWrapper(source, encoding="utf-8", errors="strict", newline="")
    reader = csv.reader(text)
    try:
        header = next(reader, None)
    except UnicodeDecodeError as exc:
        raise IngestError(f"undecodable UTF-8 in header row: {exc}") from exc
    if header is None:
        raise IngestError("empty metadata file: missing header row")

    columns = {name: idx for idx, name in enumerate(header)}
    for name in MANDATORY_COLUMNS:
        if name not in columns:
            raise IngestError(f"metadata header is missing mandatory column '{name}'")

    def cell(row: list[str], name: str) -> str:
        idx = columns.get(name)
        if idx is None or idx >= len(row):
            return ""
        return row[idx]

    records: list[PaperRecord] = []
    dropped = 0
    while True:
        try:
            row = next(reader, None)
        except UnicodeDecodeError as exc:
            raise IngestError(
                f"undecodable UTF-8 around row {reader.line_num}: {exc}"
            ) from exc
        if row is None:
            break
        if not row or all(c == "" for c in row):
            continue
        cord_uid = cell(row, "cord_uid").strip()
        if not cord_uid:
            dropped += 1
            continue
        records.append(
            PaperRecord(
                cord_uid=cord_uid,
                title=cell(row, "title"),
                abstract=cell(row, "abstract"),
                journal=cell(row, "journal") or None,
                authors=cell(row, "authors") or None,
                publish_time=PartialDate.parse(cell(row, "publish_time")),
                doi=cell(row, "doi") or None,
            )
        )
    return IngestResult(records, dropped)


def dedupe(records: Sequence[PaperRecord]) -> tuple[list[PaperRecord], int]:
    """Collapse duplicate cord_uids, keeping the latest publish_time.

    Ties (equal or both-absent dates) are broken by later file position.
    The output preserves the first-occurrence order of surviving ids.
    Returns (survivors, dropped_count).
    """
    best: dict[str, tuple[tuple[int, int, int], int]] = {}
    chosen: dict[str, PaperRecord] = {}
    first_seen: list[str] = []
    for pos, rec in enumerate(records):
        date_key = rec.publish_time.sort_key() if rec.publish_time else (0, 0, 0)
        if rec.cord_uid not in best:
            first_seen.append(rec.cord_uid)
            best[rec.cord_uid] = (date_key, pos)
            chosen[rec.cord_uid] = rec
        elif (date_key, pos) >= best[rec.cord_uid]:
            best[rec.cord_uid] = (date_key, pos)
            chosen[rec.cord_uid] = rec
    survivors = [chosen[uid] for uid in first_seen]
    return survivors, len(records) - len(survivors)


def shard_filter(index: int, node: int, nodes: int) -> bool:
    """True iff `index` belongs to shard `node` out of `nodes` total."""
    if nodes < 1:
        raise ValueError(f"nodes must be positive, got {nodes}")
    if not 0 <= node < nodes:
        raise ValueError(f"node must be in [0, {nodes}), got {node}")
    if index < 0:
        raise ValueError(f"index must be nonnegative, got {index}")
    return index % nodes == node


def write_metadata_csv(records: Iterable[PaperRecord], out) -> int:
    """Write records back out as a metadata CSV; returns the row count."""
    writer = csv.writer(out)
    writer.writerow(["cord_uid", "title", "journal", "authors", "abstract", "publish_time", "doi"])
    n = 0
    for rec in records:
        writer.writerow(
            [
                rec.cord_uid,
                rec.title,
                rec.journal or "",
                rec.authors or "",
                rec.abstract,
                str(rec.publish_time) if rec.publish_time else "",
                rec.doi or "",
            ]
        )
        n += 1
    return n

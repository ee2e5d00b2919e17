"""Embedded document store: append-only JSONL segments with upsert-by-id.

Layout on disk::

    <root>/LOCK                 exclusive-writer lock file
    <root>/segments/0001.jsonl  one wire-schema document per line

Later lines supersede earlier ones with the same id; the in-memory index
is rebuilt on open by a full scan, so a process killed after a flush
reopens to the same live set. A truncated final line (torn write) is
ignored. One writer per root, any number of readers; a single open writer
handle is itself safe to share between threads.
"""

from __future__ import annotations

import fcntl
import json
import os
import re
import threading
from pathlib import Path
from typing import Iterable, Iterator

from .errors import StorageError
from .model import AnalyzedPaper
from . import wire

_SEGMENT_RE = re.compile(r"^(\d{4})\.jsonl$")


class DocumentStore:
    """Handle on one store root. Use `open_write`/`open_read` to obtain one."""

    def __init__(self, root: Path, writable: bool):
        self.root = Path(root)
        self.writable = writable
        self._segments_dir = self.root / "segments"
        self._index: dict[str, tuple[Path, int]] = {}
        self._lock_file = None
        self._active_segment = None
        self._active_path: Path | None = None
        self._mutex = threading.Lock()
        self._read_handles: dict[Path, object] = {}

    # -- lifecycle -----------------------------------------------------

    @classmethod
    def open_write(cls, root: str | Path) -> "DocumentStore":
        store = cls(Path(root), writable=True)
        store._segments_dir.mkdir(parents=True, exist_ok=True)
        store._acquire_lock()
        store._rebuild_index()
        return store

    @classmethod
    def open_read(cls, root: str | Path) -> "DocumentStore":
        store = cls(Path(root), writable=False)
        if not store._segments_dir.is_dir():
            raise StorageError(f"not a document store: {store.root}")
        store._rebuild_index()
        return store

    @classmethod
    def create(cls, root: str | Path) -> "DocumentStore":
        return cls.open_write(root)

    def close(self) -> None:
        with self._mutex:
            if self._active_segment is not None:
                self._active_segment.close()
                self._active_segment = None
            for fh in self._read_handles.values():
                fh.close()
            self._read_handles.clear()
            if self._lock_file is not None:
                fcntl.flock(self._lock_file, fcntl.LOCK_UN)
                self._lock_file.close()
                self._lock_file = None

    def __enter__(self) -> "DocumentStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _acquire_lock(self) -> None:
        lock_path = self.root / "LOCK"
        fh = open(lock_path, "a+")
        try:
            fcntl.flock(fh, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except OSError as exc:
            fh.close()
            raise StorageError(f"store {self.root} already has a writer") from exc
        self._lock_file = fh

    # -- index ----------------------------------------------------------

    def _segment_paths(self) -> list[Path]:
        if not self._segments_dir.is_dir():
            return []
        named = []
        for p in self._segments_dir.iterdir():
            m = _SEGMENT_RE.match(p.name)
            if m:
                named.append((int(m.group(1)), p))
        return [p for _, p in sorted(named)]

    def _rebuild_index(self) -> None:
        self._index.clear()
        for path in self._segment_paths():
            with open(path, "rb") as fh:
                offset = 0
                for line in fh:
                    if not line.endswith(b"\n"):
                        break  # torn tail from an interrupted write
                    try:
                        doc_id = json.loads(line)["id"]
                    except (json.JSONDecodeError, KeyError, TypeError):
                        break
                    self._index[doc_id] = (path, offset)
                    offset += len(line)

    @property
    def doc_count(self) -> int:
        return len(self._index)

    def ids(self) -> list[str]:
        return sorted(self._index)

    # -- operations -----------------------------------------------------

    def _ensure_segment(self):
        if self._active_segment is None:
            next_no = 1
            paths = self._segment_paths()
            if paths:
                next_no = int(paths[-1].stem) + 1
            path = self._segments_dir / f"{next_no:04d}.jsonl"
            self._active_segment = open(path, "ab")
            self._active_path = path
        return self._active_segment

    def upsert(self, doc: AnalyzedPaper) -> None:
        """Write or replace the document with doc.id. Durable after return."""
        if not self.writable:
            raise StorageError("store opened read-only")
        doc.validate()
        line = (wire.store_line(doc) + "\n").encode("utf-8")
        with self._mutex:
            fh = self._ensure_segment()
            offset = fh.tell()
            try:
                fh.write(line)
                fh.flush()
            except OSError as exc:
                raise StorageError(f"write failed: {exc}") from exc
            self._index[doc.id] = (self._active_path, offset)

    def get(self, doc_id: str) -> AnalyzedPaper | None:
        entry = self._index.get(doc_id)
        if entry is None:
            return None
        path, offset = entry
        line = self._read_line(path, offset)
        return wire.paper_from_store_line(line)

    def _read_line(self, path: Path, offset: int) -> str:
        with self._mutex:
            fh = self._read_handles.get(path)
            if fh is None:
                try:
                    fh = open(path, "rb")
                except OSError as exc:
                    raise StorageError(f"cannot open segment {path}: {exc}") from exc
                self._read_handles[path] = fh
            fh.seek(offset)
            return fh.readline().decode("utf-8")

    def scan(self) -> Iterator[AnalyzedPaper]:
        """Yield every live document exactly once, in id order."""
        for doc_id in self.ids():
            doc = self.get(doc_id)
            if doc is not None:
                yield doc

    def documents(self) -> Iterator[dict]:
        """Query-engine view of the live documents, in scan order."""
        for paper in self.scan():
            yield paper.to_document()

    def compact(self) -> None:
        """Drop superseded versions from disk. Requires the writer handle."""
        if not self.writable:
            raise StorageError("compact requires a writable store")
        with self._mutex:
            old_paths = self._segment_paths()
            next_no = (int(old_paths[-1].stem) + 1) if old_paths else 1
            if self._active_segment is not None:
                self._active_segment.close()
                self._active_segment = None
            for fh in self._read_handles.values():
                fh.close()
            self._read_handles.clear()

            tmp = self._segments_dir / ".compact.tmp"
            with open(tmp, "wb") as out:
                handles = {}
                try:
                    for doc_id in sorted(self._index):
                        path, offset = self._index[doc_id]
                        src = handles.get(path)
                        if src is None:
                            src = handles[path] = open(path, "rb")
                        src.seek(offset)
                        out.write(src.readline())
                finally:
                    for src in handles.values():
                        src.close()
                out.flush()
                os.fsync(out.fileno())
            final = self._segments_dir / f"{next_no:04d}.jsonl"
            os.replace(tmp, final)
            for path in old_paths:
                path.unlink()
        self._rebuild_index()

    def iter_file_order(self) -> Iterator[AnalyzedPaper]:
        """Every stored version in append order (superseded ones included)."""
        for path in self._segment_paths():
            with open(path, "rb") as fh:
                for line in fh:
                    if not line.endswith(b"\n"):
                        break
                    yield wire.paper_from_store_line(line.decode("utf-8"))


def merge(into_root: str | Path, shard_roots: Iterable[str | Path]) -> int:
    """Concatenate shard stores into one, last write (in argument order) wins.

    Returns the number of live documents in the merged store.
    """
    with DocumentStore.open_write(into_root) as target:
        for shard_root in shard_roots:
            source = DocumentStore.open_read(shard_root)
            try:
                for paper in source.iter_file_order():
                    target.upsert(paper)
            finally:
                source.close()
        return target.doc_count

"""Sharded, resumable corpus processing into per-shard document stores.

A shard owns the metadata rows whose index is congruent to its number
modulo the node count. Each shard writes its own store root (honoring the
single-writer contract); the shard stores are merged afterwards, last
write in shard order winning for duplicate ids.

Per-document analysis failures are recorded and skipped; configuration,
authentication and storage errors abort the shard.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Sequence

from . import store as store_mod
from .errors import AuthError, MedlitError, StorageError
from .extract import analyze_local
from .gazetteer import GazetteerEntry, bundled_gazetteer, load_gazetteer
from .ingest import parse_metadata, shard_filter
from .model import AnalyzedPaper, PaperRecord
from .remote import HealthAnalysisClient, RetryPolicy, with_retry
from .wire import paper_from_wire

CHECKPOINT_FILE = "checkpoint.json"


@dataclass(frozen=True)
class PipelineConfig:
    metadata_path: Path
    store_root: Path
    backend: str = "local"  # local | remote | mock
    nodes: int = 1
    node: int | str = 0  # shard number, or "all"
    gazetteer_path: Path | None = None
    retry: RetryPolicy = RetryPolicy()
    checkpoint_interval: int = 25
    resume: bool = True
    retry_failed: bool = False
    batch_size: int = 10
    canned_path: Path | None = None  # mock backend replay file (JSONL)
    endpoint: str | None = None
    key: str | None = None

    def __post_init__(self):
        if self.node != "all":
            if not isinstance(self.node, int):
                raise ValueError(f"node must be an integer or 'all', got {self.node!r}")
            if not 0 <= self.node < self.nodes:
                raise ValueError(f"node {self.node} out of range for {self.nodes} nodes")


@dataclass
class Checkpoint:
    shard: int
    last_processed_index: int = -1
    processed_ids: int = 0
    failed_ids: list[tuple[str, str]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "shard": self.shard,
            "last_processed_index": self.last_processed_index,
            "processed_ids": self.processed_ids,
            "failed_ids": [list(pair) for pair in self.failed_ids],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Checkpoint":
        return cls(
            shard=obj["shard"],
            last_processed_index=obj["last_processed_index"],
            processed_ids=obj["processed_ids"],
            failed_ids=[tuple(pair) for pair in obj.get("failed_ids", [])],
        )


@dataclass
class ShardReport:
    shard: int
    processed: int = 0
    skipped_empty_abstract: int = 0
    failed: list[tuple[str, str]] = field(default_factory=list)
    elapsed: float = 0.0


# -- backends ------------------------------------------------------------


class LocalBackend:
    def __init__(self, gazetteer: Sequence[GazetteerEntry]):
        self.gazetteer = list(gazetteer)

    def analyze_many(self, records: Sequence[PaperRecord]) -> list[AnalyzedPaper]:
        out = []
        for rec in records:
            entities, relations = analyze_local(rec.abstract, self.gazetteer)
            out.append(
                AnalyzedPaper(
                    id=rec.cord_uid,
                    title=rec.title,
                    publish_time=rec.publish_time,
                    entities=entities,
                    relations=relations,
                )
            )
        return out


class MockBackend:
    """Replays canned wire-schema documents keyed by paper id.

    Papers without a canned document get empty entity/relation lists.
    """

    def __init__(self, canned: dict[str, dict]):
        self.canned = canned

    @classmethod
    def from_jsonl(cls, path: Path) -> "MockBackend":
        canned: dict[str, dict] = {}
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                obj = json.loads(line)
                canned[obj["id"]] = obj
        return cls(canned)

    def analyze_many(self, records: Sequence[PaperRecord]) -> list[AnalyzedPaper]:
        out = []
        for rec in records:
            obj = self.canned.get(rec.cord_uid, {"id": rec.cord_uid, "entities": [], "relations": []})
            out.append(paper_from_wire(obj, meta=rec))
        return out


class RemoteBackend:
    def __init__(
        self,
        client: HealthAnalysisClient,
        policy: RetryPolicy = RetryPolicy(),
        batch_size: int = 10,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.client = client
        self.policy = policy
        self.batch_size = min(batch_size, 10)
        self.sleep = sleep

    def analyze_many(self, records: Sequence[PaperRecord]) -> list[AnalyzedPaper]:
        by_id = {rec.cord_uid: rec for rec in records}
        out: list[AnalyzedPaper] = []
        for start in range(0, len(records), self.batch_size):
            batch = records[start : start + self.batch_size]
            documents = [{"id": rec.cord_uid, "text": rec.abstract} for rec in batch]
            handle = with_retry(
                lambda: self.client.submit(documents), self.policy, sleep=self.sleep
            )
            body = self.client.poll(handle, self.policy, sleep=self.sleep)
            for doc in body.get("results", {}).get("documents", []):
                meta = by_id.get(doc.get("id"))
                out.append(paper_from_wire(doc, meta=meta))
        return out


def build_backend(config: PipelineConfig, sleep: Callable[[float], None] = time.sleep):
    if config.backend == "local":
        gazetteer = (
            load_gazetteer(config.gazetteer_path) if config.gazetteer_path else bundled_gazetteer()
        )
        return LocalBackend(gazetteer)
    if config.backend == "mock":
        if config.canned_path is None:
            return MockBackend({})
        return MockBackend.from_jsonl(config.canned_path)
    if config.backend == "remote":
        endpoint = config.endpoint or os.environ.get("TA_ENDPOINT")
        key = config.key or os.environ.get("TA_KEY")
        if not endpoint or not key:
            raise MedlitError(
                "remote backend needs an endpoint and key (TA_ENDPOINT / TA_KEY)"
            )
        client = HealthAnalysisClient(endpoint, key)
        return RemoteBackend(client, config.retry, config.batch_size, sleep=sleep)
    raise MedlitError(f"unknown backend {config.backend!r}")


# -- checkpointing ----------------------------------------------------------


def _checkpoint_path(store_root: Path) -> Path:
    return Path(store_root) / CHECKPOINT_FILE


def load_checkpoint(store_root: Path) -> Checkpoint | None:
    path = _checkpoint_path(store_root)
    if not path.exists():
        return None
    with open(path, encoding="utf-8") as fh:
        return Checkpoint.from_json(json.load(fh))


def save_checkpoint(store_root: Path, checkpoint: Checkpoint) -> None:
    path = _checkpoint_path(store_root)
    tmp = path.with_suffix(".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(checkpoint.to_json(), fh)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


# -- shard execution ---------------------------------------------------------


def run_shard(
    config: PipelineConfig,
    backend=None,
    progress: Callable[[int], None] | None = None,
) -> ShardReport:
    """Process this shard's rows through the backend into its own store.

    Every metadata row whose index belongs to the shard is analyzed and
    upserted exactly once per run. Empty abstracts are stored with no
    entities and counted separately. A checkpoint is persisted every
    `checkpoint_interval` documents; resuming skips indices at or below
    the checkpointed one.
    """
    shard = int(config.node)
    backend = backend or build_backend(config)
    started = time.monotonic()

    with open(config.metadata_path, "rb") as fh:
        records = parse_metadata(fh).records

    checkpoint = load_checkpoint(config.store_root) if config.resume else None
    if checkpoint is None:
        checkpoint = Checkpoint(shard=shard)
    retry_ids = {pair[0] for pair in checkpoint.failed_ids} if config.retry_failed else set()
    if config.retry_failed:
        checkpoint.failed_ids = []

    report = ShardReport(shard=shard)
    report.failed = list(checkpoint.failed_ids)

    mine = [
        (index, rec)
        for index, rec in enumerate(records)
        if shard_filter(index, shard, config.nodes)
        and (index > checkpoint.last_processed_index or rec.cord_uid in retry_ids)
    ]

    with store_mod.DocumentStore.open_write(config.store_root) as shard_store:
        since_checkpoint = 0
        for start in range(0, len(mine), config.batch_size):
            batch = mine[start : start + config.batch_size]
            to_analyze = [(i, rec) for i, rec in batch if rec.abstract.strip()]
            empties = [(i, rec) for i, rec in batch if not rec.abstract.strip()]

            analyzed: list[tuple[int, AnalyzedPaper]] = []
            if to_analyze:
                try:
                    papers = backend.analyze_many([rec for _, rec in to_analyze])
                    analyzed = list(zip((i for i, _ in to_analyze), papers))
                except (AuthError, StorageError):
                    raise
                except MedlitError:
                    # Batch-level failure: fall back to per-document calls so
                    # one poison document cannot sink its batch mates.
                    analyzed = []
                    for i, rec in to_analyze:
                        try:
                            papers = backend.analyze_many([rec])
                            analyzed.append((i, papers[0]))
                        except (AuthError, StorageError):
                            raise
                        except MedlitError as doc_exc:
                            checkpoint.failed_ids.append((rec.cord_uid, type(doc_exc).__name__))
                            report.failed.append((rec.cord_uid, type(doc_exc).__name__))

            for i, rec in empties:
                shard_store.upsert(
                    AnalyzedPaper(id=rec.cord_uid, title=rec.title, publish_time=rec.publish_time)
                )
                report.skipped_empty_abstract += 1
                report.processed += 1
            for i, paper in analyzed:
                shard_store.upsert(paper)
                report.processed += 1

            batch_max = max(i for i, _ in batch)
            checkpoint.last_processed_index = max(checkpoint.last_processed_index, batch_max)
            checkpoint.processed_ids += len(batch)
            since_checkpoint += len(batch)
            if progress is not None:
                progress(len(batch))
            if since_checkpoint >= config.checkpoint_interval:
                save_checkpoint(config.store_root, checkpoint)
                since_checkpoint = 0
        save_checkpoint(config.store_root, checkpoint)

    report.elapsed = time.monotonic() - started
    return report


def shard_store_root(store_root: Path, shard: int) -> Path:
    return Path(store_root) / "shards" / f"shard{shard}"


def run_all(config: PipelineConfig, workers: int = 4) -> list[ShardReport]:
    """Run every shard (each into its own store) and merge into store_root.

    Shards execute on a thread pool; a fatal error in any shard fails the
    whole run after the others drain.
    """
    if config.node != "all":
        raise ValueError("run_all requires node='all'")

    def one(shard: int) -> ShardReport:
        shard_config = replace(
            config, node=shard, store_root=shard_store_root(config.store_root, shard)
        )
        return run_shard(shard_config)

    reports: list[ShardReport] = []
    errors: list[Exception] = []
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        futures = [pool.submit(one, shard) for shard in range(config.nodes)]
        for future in futures:
            try:
                reports.append(future.result())
            except Exception as exc:  # noqa: BLE001 - drained and re-raised below
                errors.append(exc)
    if errors:
        raise errors[0]
    store_mod.merge(
        config.store_root,
        [shard_store_root(config.store_root, shard) for shard in range(config.nodes)],
    )
    return sorted(reports, key=lambda r: r.shard)

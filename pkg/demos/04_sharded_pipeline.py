#!/usr/bin/env python3
"""Sharded processing: 8 workers, per-shard stores, merge, crash resume.

    python3 demos/04_sharded_pipeline.py
"""

import tempfile
from pathlib import Path

from medlit.pipeline import (
    LocalBackend,
    PipelineConfig,
    load_checkpoint,
    run_all,
    run_shard,
)
from medlit.gazetteer import bundled_gazetteer
from medlit.sample import write_synthetic_corpus
from medlit.store import DocumentStore

workdir = Path(tempfile.mkdtemp(prefix="medlit-demo-"))
metadata = workdir / "metadata.csv"
write_synthetic_corpus(metadata, n=50, seed=7)

# ---------------------------------------------------------------------------
# 1. Run all 8 shards concurrently. Each shard takes the rows with
#    index % 8 == shard, writes its own store, and the shard stores are
#    merged at the end.
# ---------------------------------------------------------------------------

config = PipelineConfig(
    metadata_path=metadata,
    store_root=workdir / "parallel",
    nodes=8,
    node="all",
)
reports = run_all(config, workers=8)
for r in reports:
    print(f"shard {r.shard}: processed={r.processed} empty={r.skipped_empty_abstract}")

merged = DocumentStore.open_read(workdir / "parallel")
print(f"merged store: {merged.doc_count} documents")
merged.close()

# ---------------------------------------------------------------------------
# 2. Crash resume: kill a run partway, resume it, end with the same store.
#    Checkpoints are written every `checkpoint_interval` documents.
# ---------------------------------------------------------------------------


class CrashingBackend(LocalBackend):
    def __init__(self, crash_after: int):
        super().__init__(bundled_gazetteer())
        self.crash_after = crash_after
        self.seen = 0

    def analyze_many(self, records):
        self.seen += len(records)
        if self.seen > self.crash_after:
            raise KeyboardInterrupt("simulated node failure")
        return super().analyze_many(records)


crash_config = PipelineConfig(
    metadata_path=metadata, store_root=workdir / "crashy", checkpoint_interval=10
)
try:
    run_shard(crash_config, backend=CrashingBackend(crash_after=20))
except KeyboardInterrupt:
    checkpoint = load_checkpoint(workdir / "crashy")
    print(f"\ncrashed; checkpoint at index {checkpoint.last_processed_index}")

report = run_shard(crash_config)  # resumes past the checkpoint
print(f"resumed run processed {report.processed} remaining documents")

with DocumentStore.open_write(workdir / "crashy") as store:
    store.compact()
    print(f"store after resume: {store.doc_count} documents")

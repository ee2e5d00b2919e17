#!/usr/bin/env python3
"""Aggregate analytics: term rollups, trends, shares, co-occurrence.

    python3 demos/03_analytics.py
"""

import tempfile
from pathlib import Path

from medlit import analytics
from medlit.pipeline import PipelineConfig, run_shard
from medlit.sample import write_synthetic_corpus
from medlit.store import DocumentStore

workdir = Path(tempfile.mkdtemp(prefix="medlit-demo-"))
metadata = workdir / "metadata.csv"
write_synthetic_corpus(metadata, n=50, seed=42)

run_shard(PipelineConfig(metadata_path=metadata, store_root=workdir / "store"))
store = DocumentStore.open_read(workdir / "store")
papers = list(store.scan())
store.close()

# ---------------------------------------------------------------------------
# 1. Roll mentions up by ontology id: surface variants like "HCQ" and
#    "hydroxychloroquine" share one row; negativity = negated / total.
# ---------------------------------------------------------------------------

mentions = analytics.extract_mentions(papers, "MedicationName")
print(f"{len(mentions)} medication mentions across {len(papers)} papers\n")
print(f"{'key':<24}{'name':<22}{'count':>6}{'neg':>5}  negativity")
for stat in analytics.rollup(mentions)[:8]:
    print(f"{stat.umls_id:<24}{stat.name:<22}{stat.mention_count:>6}"
          f"{stat.negated_count:>5}  {stat.negativity:.6f}")

# ---------------------------------------------------------------------------
# 2. Monthly trend for one term, and relative shares among the top terms.
# ---------------------------------------------------------------------------

series, skipped = analytics.monthly_series(mentions, "C0020336")
print(f"\nhydroxychloroquine mentions per month (skipped {skipped} undated):")
for month, count in series.points:
    print(f"  {month}  {'#' * count}{count}")

top = analytics.rollup(mentions)[:4]
aligned = analytics.align_series(
    [analytics.monthly_series(mentions, s.umls_id)[0] for s in top]
)
table = analytics.relative_shares(aligned)
print("\nshares of the top 4 terms (rows) per month:")
print("  months:", " ".join(table.months))
for key, row in zip(table.term_keys, table.shares):
    print(f"  {key:<14}", " ".join(f"{v:.2f}" for v in row))

# ---------------------------------------------------------------------------
# 3. Co-occurrence: papers mentioning two terms together, exported for
#    sankey (cross-category) and chord (same-category) rendering.
# ---------------------------------------------------------------------------

meds = analytics.top_term_specs(papers, "MedicationName", 6)
diag = analytics.top_term_specs(papers, "Diagnosis", 4)

square = analytics.cooccurrence(papers, meds, meds)
print("\nmedication co-occurrence matrix (binary per paper):")
print("  labels:", [t.label for t in meds])
for row in square.counts.tolist():
    print("  ", row)

sankey = analytics.sankey_export(analytics.cooccurrence(papers, diag, meds), top_n=4)
print("\nsankey links (diagnosis -> medication):")
for link in sankey["links"][:6]:
    print(f"  {link['source']} -> {link['target']}: {link['value']}")

chord = analytics.chord_export(square)
print("\nchord export keys:", chord["keys"])
out = workdir / "chord.json"
out.write_bytes(analytics.export_bytes(chord))
print(f"wrote {out}")

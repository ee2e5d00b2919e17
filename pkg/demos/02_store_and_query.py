#!/usr/bin/env python3
"""Build a document store and explore it with the SQL dialect.

    python3 demos/02_store_and_query.py
"""

import tempfile
from pathlib import Path

from medlit.extract import analyze_local
from medlit.gazetteer import bundled_gazetteer
from medlit.model import AnalyzedPaper, HealthEntity, HealthRelation, PartialDate
from medlit.query import evaluate, parse_query
from medlit.store import DocumentStore

workdir = Path(tempfile.mkdtemp(prefix="medlit-demo-"))
root = workdir / "store"

# ---------------------------------------------------------------------------
# 1. Store a few analyzed papers. Upserts are append-only JSONL lines;
#    the newest version of an id wins.
# ---------------------------------------------------------------------------

abstracts = {
    "p1": ("HCQ and azithromycin combination", "2020-03",
           "hydroxychloroquine (HCQ) with azithromycin was evaluated."),
    "p2": ("Remdesivir outcomes", "2020-05",
           "remdesivir shortened recovery; no chloroquine was administered."),
    "p3": ("HCQ follow-up", "2020-07",
           "HCQ showed no benefit for COVID-19."),
}

with DocumentStore.open_write(root) as store:
    for pid, (title, date, text) in abstracts.items():
        entities, relations = analyze_local(text, bundled_gazetteer())
        store.upsert(AnalyzedPaper(
            id=pid, title=title, publish_time=PartialDate.parse(date),
            entities=entities, relations=relations,
        ))
    # One paper carries a dosage relation, built by hand here since the
    # local extractor only emits Abbreviation edges.
    dose = HealthEntity(offset=0, length=6, text="400 mg", category="Dosage")
    med = HealthEntity(offset=10, length=18, text="hydroxychloroquine",
                       category="MedicationName")
    store.upsert(AnalyzedPaper(
        id="p4", title="Dosing regimens", publish_time=PartialDate.parse("2020-04-15"),
        entities=(dose, med),
        relations=(HealthRelation("DosageOfMedication", False, 0, 1),),
    ))
    print(f"store at {root} holds {store.doc_count} documents")

# ---------------------------------------------------------------------------
# 2. The three corpus queries: unique medications, dosages of a drug,
#    entities with their UMLS ids.
# ---------------------------------------------------------------------------

queries = {
    "unique medication names": """
        SELECT DISTINCT e.text
        FROM papers p
        JOIN e IN p.entities
        WHERE e.category='MedicationName'
    """,
    "dosages of hydro* drugs": """
        SELECT p.title, r.source.text
        FROM papers p JOIN r IN p.relations
        WHERE r.relationType='DosageOfMedication'
        AND r.target.text LIKE 'hydro%'
    """,
    "entities with UMLS ids": """
        SELECT e.category, e.text,
          ARRAY(SELECT VALUE l.id FROM l IN e.links
                WHERE l.dataSource='UMLS')[0] AS umls_id
        FROM papers p JOIN e IN p.entities
    """,
}

store = DocumentStore.open_read(root)
docs = list(store.documents())
store.close()

for label, sql in queries.items():
    print(f"\n-- {label}")
    for row in evaluate(parse_query(sql), docs):
        print("  ", row)

#!/usr/bin/env python3
"""Walk through metadata ingestion and local entity extraction.

Run from the repository root:

    python3 demos/01_ingest_and_extract.py
"""

from medlit.extract import analyze_local, detect_negation
from medlit.gazetteer import bundled_gazetteer
from medlit.ingest import dedupe, parse_metadata

# ---------------------------------------------------------------------------
# 1. Parse a small metadata CSV. Rows keep file order, bad dates survive as
#    "no date", and rows without an id are dropped (but counted).
# ---------------------------------------------------------------------------

metadata = b"""\
cord_uid,title,journal,authors,abstract,publish_time,doi
jkk62qn0z,HCQ toxicology study,J Virol,Doe J,"Use of hydroxychloroquine (HCQ) was tested.",2020-05-01,10.1/a
abc123,Remdesivir trial,,Smith A,"Remdesivir showed effects. COVID-19 diagnosis did not occur.",2020-06,10.1/b
abc123,Remdesivir trial (revised),,Smith A,"Remdesivir showed effects.",2020-07,10.1/b
,orphan row,,,no id on this row,2020,
weird01,Date experiments,,,abstract here,31-12-2020,
"""

result = parse_metadata(metadata)
print(f"parsed {len(result.records)} records, dropped {result.dropped_empty_id} without id")
for rec in result.records:
    print(f"  {rec.cord_uid:>9}  date={rec.publish_time}  title={rec.title!r}")

# Duplicate ids collapse to the record with the latest publish_time.
records, dropped = dedupe(result.records)
print(f"\nafter dedupe: {len(records)} records ({dropped} duplicates dropped)")
print("  abc123 surviving title:", next(r.title for r in records if r.cord_uid == "abc123"))

# ---------------------------------------------------------------------------
# 2. Extract entities with the bundled gazetteer. Matching is case
#    insensitive, word-boundary aligned, longest match first.
# ---------------------------------------------------------------------------

abstract = records[0].abstract
entities, relations = analyze_local(abstract, bundled_gazetteer())
print(f"\nabstract: {abstract!r}")
for e in entities:
    links = ",".join(l.id for l in e.links) or "-"
    print(f"  [{e.offset:>3}] {e.text:<22} {e.category:<16} links={links}")
for r in relations:
    print(f"  relation: {entities[r.source].text} <-> {entities[r.target].text} ({r.relation_type})")

# ---------------------------------------------------------------------------
# 3. Negation: a trigger word in the same clause marks nearby entities.
#    ", but" ends the trigger's scope, so cough stays positive below.
# ---------------------------------------------------------------------------

from medlit.gazetteer import GazetteerEntry

symptoms = bundled_gazetteer() + [
    GazetteerEntry("fever", "SymptomOrSign"),
    GazetteerEntry("cough", "SymptomOrSign"),
]
negation_text = "COVID-19 diagnosis did not occur. No fever, but cough persisted."
entities, _ = analyze_local(negation_text, symptoms)
entities = detect_negation(negation_text, entities)
print()
for e in entities:
    print(f"  {e.text:<10} negated={e.is_negated}")

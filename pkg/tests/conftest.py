import json

import pytest

from medlit.model import (
    AnalyzedPaper,
    EntityLink,
    HealthEntity,
    HealthRelation,
    PartialDate,
)

# The example abstract analyzed in the service documentation; the known
# result places "coronavirus disease pandemic" at offset 24, length 28.
EXAMPLE_ABSTRACT = (
    "As a result of the 2019 coronavirus disease pandemic (COVID-19), there has been "
    "an urgent worldwide demand for treatments. Due to factors such as history of "
    "prescription for other infectious diseases, availability, and relatively low cost, "
    "the use of chloroquine (CQ) and hydroxychloroquine (HCQ) has been tested in vivo "
    "and in vitro for the ability to inhibit the causative virus, severe acute "
    "respiratory syndrome coronavirus 2 (SARS-CoV-2). However, even though investigators "
    "noted the therapeutic potential of these drugs, it is important to consider the "
    "toxicological risks and necessary care for rational use of CQ and HCQ. This study "
    "provides information on the main toxicological and epidemiological aspects to be "
    "considered for prophylaxis or treatment of COVID-19 using CQ but mainly HCQ, which "
    "is a less toxic derivative than CQ, and was shown to produce better results in "
    "inhibiting proliferation of SARS-CoV-2 based upon preliminary tests."
)

# The published example result document, repaired to valid JSON (closing
# bracket between entities and relations, elisions removed). The relation
# pointers reference entities 6 and 7 of the original full document, which
# the excerpt does not contain.
EXAMPLE_RESULT_JSON = """\
{ "id": "jkk62qn0z",
  "entities": [
    { "offset": 24, "length": 28, "text": "coronavirus disease pandemic",
      "category": "Diagnosis", "confidenceScore": 0.98,
      "isNegated": false },
    { "offset": 54, "length": 8, "text": "COVID-19",
      "category": "Diagnosis", "confidenceScore": 1.0, "isNegated": false,
      "links": [
        { "dataSource": "UMLS", "id": "C5203670" },
        { "dataSource": "ICD10CM", "id": "U07.1" } ] }
  ],
  "relations": [
    { "relationType": "Abbreviation", "bidirectional": true,
      "source": "#/results/documents/2/entities/6",
      "target": "#/results/documents/2/entities/7" } ]
}
"""

# Same excerpt with the relation re-anchored to the two entities it has
# (the long form and its parenthesized abbreviation), for round-trip checks.
EXAMPLE_RESULT_JSON_SELF_CONTAINED = EXAMPLE_RESULT_JSON.replace(
    "entities/6", "entities/0"
).replace("entities/7", "entities/1")

QUERY_UNIQUE_MEDS = """\
-- unique medication names
SELECT DISTINCT e.text
FROM papers p
JOIN e IN p.entities
WHERE e.category='MedicationName'
"""

QUERY_DOSAGE = """\
-- dosage of specific drug with paper titles
SELECT p.title, r.source.text
FROM papers p JOIN r IN p.relations
WHERE r.relationType='DosageOfMedication'
AND r.target.text LIKE 'hydro%'
"""

QUERY_UMLS = """\
--- get entities with UMLS IDs
SELECT e.category, e.text,
  ARRAY (SELECT VALUE l.id
    FROM l IN e.links
    WHERE l.dataSource='UMLS')[0] AS umls_id
FROM papers p JOIN e IN p.entities
"""

PAPER_QUERIES = (QUERY_UNIQUE_MEDS, QUERY_DOSAGE, QUERY_UMLS)


def make_paper(
    pid: str,
    title: str = "",
    date: str | None = None,
    entities: tuple = (),
    relations: tuple = (),
) -> AnalyzedPaper:
    return AnalyzedPaper(
        id=pid,
        title=title or f"Paper {pid}",
        publish_time=PartialDate.parse(date) if date else None,
        entities=entities,
        relations=relations,
    )


def ent(
    offset: int,
    text: str,
    category: str = "MedicationName",
    umls: str | None = None,
    negated: bool = False,
    confidence: float = 1.0,
    extra_links: tuple = (),
) -> HealthEntity:
    links = ()
    if umls:
        links = (EntityLink("UMLS", umls),)
    return HealthEntity(
        offset=offset,
        length=len(text),
        text=text,
        category=category,
        confidence=confidence,
        is_negated=negated,
        links=links + extra_links,
    )


def dosage_paper(pid: str = "dose1", date: str = "2020-04-01") -> AnalyzedPaper:
    """Paper carrying a DosageOfMedication relation (400 mg -> hydroxychloroquine)."""
    entities = (
        ent(0, "400 mg", "Dosage"),
        ent(10, "hydroxychloroquine", "MedicationName", umls="C0020336"),
    )
    relations = (HealthRelation("DosageOfMedication", False, 0, 1),)
    return make_paper(pid, title="Dosing study", date=date, entities=entities, relations=relations)


@pytest.fixture
def example_abstract() -> str:
    return EXAMPLE_ABSTRACT


@pytest.fixture
def example_result_json() -> str:
    return EXAMPLE_RESULT_JSON


@pytest.fixture
def query_fixture_papers() -> list[AnalyzedPaper]:
    """Three papers with overlapping medication mentions and one dosage edge."""
    p1 = make_paper(
        "a1",
        date="2020-03-05",
        entities=(
            ent(0, "HCQ", umls="C0020336"),
            ent(10, "azithromycin", umls="C0052796"),
        ),
    )
    p2 = make_paper(
        "b2",
        date="2020-04-10",
        entities=(
            ent(3, "HCQ", umls="C0020336"),
            ent(9, "COVID-19", "Diagnosis", umls="C5203670"),
        ),
    )
    p3 = dosage_paper("c3")
    return [p1, p2, p3]


def store_with(tmp_path, papers, name="store"):
    from medlit.store import DocumentStore

    root = tmp_path / name
    with DocumentStore.open_write(root) as store:
        for paper in papers:
            store.upsert(paper)
    return root


def load_docs(papers) -> list[dict]:
    return [p.to_document() for p in papers]


def json_loads_bytes(data: bytes):
    return json.loads(data.decode("utf-8"))

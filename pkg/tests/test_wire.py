import json

import pytest
from hypothesis import given, strategies as st

from medlit.errors import WireFormatError
from medlit.model import AnalyzedPaper, EntityLink, HealthEntity, HealthRelation, PaperRecord, PartialDate
from medlit.wire import (
    paper_from_wire,
    paper_to_wire,
    parse_result_json,
    resolve_pointer,
    serialize_result_json,
    store_line,
    paper_from_store_line,
)

from .conftest import (
    EXAMPLE_RESULT_JSON,
    EXAMPLE_RESULT_JSON_SELF_CONTAINED,
    ent,
    make_paper,
)


class TestParseExampleResult:
    def test_first_entity_fields(self):
        paper = parse_result_json(EXAMPLE_RESULT_JSON)
        assert paper.id == "jkk62qn0z"
        first = paper.entities[0]
        assert first.offset == 24
        assert first.length == 28
        assert first.text == "coronavirus disease pandemic"
        assert first.category == "Diagnosis"
        assert first.confidence == 0.98
        assert first.is_negated is False

    def test_covid_entity_links(self):
        paper = parse_result_json(EXAMPLE_RESULT_JSON)
        covid = paper.entities[1]
        assert covid.text == "COVID-19"
        link_pairs = {(l.data_source, l.id) for l in covid.links}
        assert link_pairs == {("UMLS", "C5203670"), ("ICD10CM", "U07.1")}

    def test_dangling_relation_dropped_document_kept(self):
        # The excerpt's relation points at entities 6 and 7 of the original
        # full document; only the relation is dropped.
        paper = parse_result_json(EXAMPLE_RESULT_JSON)
        assert len(paper.entities) == 2
        assert paper.relations == ()

    def test_self_contained_variant_keeps_relation(self):
        paper = parse_result_json(EXAMPLE_RESULT_JSON_SELF_CONTAINED)
        assert len(paper.relations) == 1
        rel = paper.relations[0]
        assert rel.relation_type == "Abbreviation"
        assert rel.bidirectional is True
        assert {paper.entities[rel.source].text, paper.entities[rel.target].text} == {
            "coronavirus disease pandemic",
            "COVID-19",
        }

    def test_round_trip_equivalent_modulo_field_order(self):
        parsed = parse_result_json(EXAMPLE_RESULT_JSON_SELF_CONTAINED)
        emitted = serialize_result_json(parsed, doc_index=2)
        assert json.loads(emitted) == json.loads(EXAMPLE_RESULT_JSON_SELF_CONTAINED)

    def test_zero_entities_and_relations(self):
        paper = parse_result_json('{"id": "x", "entities": [], "relations": []}')
        assert paper.entities == ()
        assert paper.relations == ()


class TestPointer:
    def test_resolves_entity_index(self):
        assert resolve_pointer("#/results/documents/2/entities/7") == 7

    @pytest.mark.parametrize(
        "bad",
        ["", "#/documents/2/entities/7", "#/results/documents/x/entities/7",
         "#/results/documents/2/entities/", "entities/7"],
    )
    def test_malformed_pointer_is_fatal_for_document(self, bad):
        doc = {
            "id": "p",
            "entities": [
                {"offset": 0, "length": 1, "text": "a", "category": "Diagnosis"},
                {"offset": 2, "length": 1, "text": "b", "category": "Diagnosis"},
            ],
            "relations": [
                {"relationType": "Abbreviation", "bidirectional": True,
                 "source": bad, "target": "#/results/documents/0/entities/1"}
            ],
        }
        with pytest.raises(WireFormatError):
            paper_from_wire(doc)


class TestMetaMerge:
    def test_meta_supplies_title_and_date(self):
        meta = PaperRecord(
            cord_uid="m1", title="Meta Title", abstract="some text",
            publish_time=PartialDate.parse("2020-07"),
        )
        paper = parse_result_json('{"id": "m1", "entities": [], "relations": []}', meta)
        assert paper.title == "Meta Title"
        assert str(paper.publish_time) == "2020-07"

    def test_unknown_category_preserved(self):
        doc = {"id": "u", "entities": [
            {"offset": 0, "length": 4, "text": "gene", "category": "FutureCategory"}
        ]}
        paper = paper_from_wire(doc)
        assert paper.entities[0].category == "FutureCategory"

    def test_offset_reanchored_when_units_disagree(self):
        meta = PaperRecord(cord_uid="o1", title="t", abstract="we saw hydroxychloroquine use")
        doc = {"id": "o1", "entities": [
            {"offset": 3, "length": 18, "text": "hydroxychloroquine", "category": "MedicationName"}
        ]}
        paper = paper_from_wire(doc, meta=meta)
        e = paper.entities[0]
        assert meta.abstract[e.offset : e.offset + e.length] == "hydroxychloroquine"

    def test_out_of_order_entities_sorted_with_relations_remapped(self):
        doc = {
            "id": "s1",
            "entities": [
                {"offset": 20, "length": 3, "text": "HCQ", "category": "MedicationName"},
                {"offset": 0, "length": 18, "text": "hydroxychloroquine", "category": "MedicationName"},
            ],
            "relations": [
                {"relationType": "Abbreviation", "bidirectional": True,
                 "source": "#/results/documents/0/entities/1",
                 "target": "#/results/documents/0/entities/0"}
            ],
        }
        paper = paper_from_wire(doc)
        assert [e.text for e in paper.entities] == ["hydroxychloroquine", "HCQ"]
        rel = paper.relations[0]
        assert paper.entities[rel.source].text == "hydroxychloroquine"
        assert paper.entities[rel.target].text == "HCQ"


papers_strategy = st.builds(
    lambda n_ents, rel_pairs, date: _build_paper(n_ents, rel_pairs, date),
    st.integers(0, 5),
    st.lists(st.tuples(st.integers(0, 4), st.integers(0, 4)), max_size=3),
    st.sampled_from([None, "2020", "2020-05", "2020-05-01"]),
)


def _build_paper(n_ents, rel_pairs, date):
    entities = tuple(
        HealthEntity(
            offset=i * 10,
            length=3,
            text=f"t{i}",
            category="MedicationName" if i % 2 else "Diagnosis",
            confidence=round(0.5 + i * 0.1, 2),
            is_negated=bool(i % 3 == 1),
            links=(EntityLink("UMLS", f"C{i:07d}"),) if i % 2 else (),
        )
        for i in range(n_ents)
    )
    relations = tuple(
        HealthRelation("Abbreviation", True, a, b)
        for a, b in rel_pairs
        if a != b and a < n_ents and b < n_ents
    )
    return make_paper("rt", date=date, entities=entities, relations=relations)


class TestRoundTrip:
    @given(papers_strategy)
    def test_wire_round_trip_identity(self, paper):
        again = paper_from_wire(paper_to_wire(paper, include_meta=True))
        assert again == paper

    @given(papers_strategy)
    def test_store_line_round_trip(self, paper):
        assert paper_from_store_line(store_line(paper)) == paper

    @given(papers_strategy)
    def test_serialization_deterministic(self, paper):
        assert store_line(paper) == store_line(paper)

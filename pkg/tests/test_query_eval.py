import random
from collections import Counter

import pytest
from hypothesis import given, strategies as st

from medlit.query import (
    UNDEFINED,
    evaluate,
    like_match,
    parse_query,
    projection_columns,
    resolve_path,
)

from .conftest import PAPER_QUERIES, QUERY_DOSAGE, QUERY_UMLS, QUERY_UNIQUE_MEDS, load_docs
from .oracles import like_oracle
from .query_gen import random_query, random_store
from .query_oracle import MISSING, _freeze, run_oracle


class TestLikeMatch:
    def test_dosage_filter(self):
        assert like_match("hydro%", "hydroxychloroquine") is True

    def test_percent_matches_empty(self):
        assert like_match("%", "") is True

    def test_underscore_exactly_one(self):
        assert like_match("h_q", "hcq") is True
        assert like_match("h_q", "hq") is False

    def test_case_sensitive(self):
        assert like_match("HCQ", "hcq") is False

    def test_literal_specials_escaped(self):
        assert like_match("a.b", "a.b") is True
        assert like_match("a.b", "axb") is False

    @given(
        st.sampled_from(["h%", "%q", "h_q", "%", "_", "a%b_c", "", "HCQ", "%%", "a__"]),
        st.text(alphabet="abchq%_", max_size=8),
    )
    def test_matches_backtracking_oracle(self, pattern, candidate):
        assert like_match(pattern, candidate) == like_oracle(pattern, candidate)


class TestResolvePath:
    def test_nested_descent(self):
        assert resolve_path({"a": {"b": 1}}, ["a", "b"]) == 1

    def test_missing_field(self):
        assert resolve_path({"a": {}}, ["a", "b"]) is UNDEFINED

    def test_descent_through_array_undefined(self):
        assert resolve_path({"a": [1, 2]}, ["a", "b"]) is UNDEFINED

    def test_non_object_step(self):
        assert resolve_path(5, ["a"]) is UNDEFINED


class TestEvaluateSemantics:
    def test_unique_meds_deduped(self, query_fixture_papers):
        rows = evaluate(parse_query(QUERY_UNIQUE_MEDS), load_docs(query_fixture_papers))
        texts = [r["text"] for r in rows]
        assert texts.count("HCQ") == 1
        assert {"HCQ", "azithromycin", "hydroxychloroquine"} == set(texts)

    def test_empty_store(self):
        for sql in PAPER_QUERIES:
            assert evaluate(parse_query(sql), []) == []

    def test_dosage_query_row(self, query_fixture_papers):
        rows = evaluate(parse_query(QUERY_DOSAGE), load_docs(query_fixture_papers))
        assert rows == [{"title": "Dosing study", "text": "400 mg"}]

    def test_umls_query_omits_unlinked(self, query_fixture_papers):
        docs = load_docs(query_fixture_papers)
        rows = evaluate(parse_query(QUERY_UMLS), docs)
        linked = [r for r in rows if "umls_id" in r]
        unlinked = [r for r in rows if "umls_id" not in r]
        assert {r["umls_id"] for r in linked} == {"C0020336", "C0052796", "C5203670"}
        assert [r["text"] for r in unlinked] == ["400 mg"]

    def test_join_on_missing_array_yields_no_rows(self):
        docs = [{"id": "x", "title": "no entities field"}]
        rows = evaluate(parse_query("SELECT e.text FROM papers p JOIN e IN p.entities"), docs)
        assert rows == []

    def test_join_on_non_array_yields_no_rows(self):
        docs = [{"id": "x", "entities": "oops"}]
        rows = evaluate(parse_query("SELECT e.text FROM papers p JOIN e IN p.entities"), docs)
        assert rows == []

    def test_comparison_with_undefined_is_false(self):
        docs = [{"id": "x"}]
        rows = evaluate(parse_query("SELECT p.id FROM papers p WHERE p.nope = 'x'"), docs)
        assert rows == []

    def test_no_cross_type_coercion(self):
        docs = [{"id": "x", "n": 1}]
        assert evaluate(parse_query("SELECT p.id FROM papers p WHERE p.n = '1'"), docs) == []
        assert evaluate(parse_query("SELECT p.id FROM papers p WHERE p.n = 1"), docs) == [{"id": "x"}]

    def test_boolean_not_equal_to_number(self):
        docs = [{"id": "x", "flag": True}]
        assert evaluate(parse_query("SELECT p.id FROM papers p WHERE p.flag = 1"), docs) == []
        assert (
            evaluate(parse_query("SELECT p.id FROM papers p WHERE p.flag = true"), docs)
            == [{"id": "x"}]
        )

    def test_int_float_equal(self):
        docs = [{"id": "x", "n": 1}]
        assert evaluate(parse_query("SELECT p.id FROM papers p WHERE p.n = 1.0"), docs) == [{"id": "x"}]

    def test_index_out_of_range_is_undefined(self):
        docs = [{"id": "x", "arr": [10]}]
        rows = evaluate(parse_query("SELECT p.arr[5] AS v, p.id FROM papers p"), docs)
        assert rows == [{"id": "x"}]

    def test_value_projection_returns_bare_values(self):
        docs = [{"id": "a"}, {"id": "b"}]
        rows = evaluate(parse_query("SELECT VALUE p.id FROM papers p"), docs)
        assert rows == ["a", "b"]

    def test_positional_name_for_non_path_items(self):
        docs = [{"id": "a"}]
        rows = evaluate(parse_query("SELECT 5, p.id FROM papers p"), docs)
        assert rows == [{"$1": 5, "id": "a"}]

    def test_distinct_idempotent(self, query_fixture_papers):
        docs = load_docs(query_fixture_papers)
        ast = parse_query(QUERY_UNIQUE_MEDS)
        once = evaluate(ast, docs)
        keys = {_freeze(r) for r in once}
        assert len(keys) == len(once)

    def test_join_order_deterministic(self, query_fixture_papers):
        docs = load_docs(query_fixture_papers)
        ast = parse_query(QUERY_UMLS)
        assert evaluate(ast, docs) == evaluate(ast, docs)

    def test_correlated_subquery_sees_outer_binding(self):
        docs = [
            {
                "id": "x",
                "entities": [
                    {"text": "HCQ", "links": [{"dataSource": "UMLS", "id": "C1"}]},
                    {"text": "ABC", "links": [{"dataSource": "ICD10CM", "id": "Z9"}]},
                ],
            }
        ]
        sql = (
            "SELECT e.text, ARRAY(SELECT VALUE l.id FROM l IN e.links "
            "WHERE l.dataSource='UMLS') AS ids FROM papers p JOIN e IN p.entities"
        )
        rows = evaluate(parse_query(sql), docs)
        assert rows == [{"text": "HCQ", "ids": ["C1"]}, {"text": "ABC", "ids": []}]


class TestProjectionColumns:
    def test_select_list(self):
        assert projection_columns(parse_query(QUERY_DOSAGE)) == ["title", "text"]

    def test_value(self):
        assert projection_columns(parse_query("SELECT VALUE p.id FROM papers p")) is None


def _normalize(row):
    if row is UNDEFINED or row is MISSING:
        return ("u",)
    return _freeze(row)


def assert_engine_matches_oracle(papers, ast):
    docs = [p.to_document() for p in papers]
    reparsed = parse_query(ast.to_sql())
    assert reparsed == ast, f"pretty-print round-trip changed the AST for {ast.to_sql()}"
    engine_rows = evaluate(reparsed, docs)
    oracle_rows = run_oracle(ast, docs)
    assert Counter(map(_normalize, engine_rows)) == Counter(map(_normalize, oracle_rows)), (
        f"divergence for query: {ast.to_sql()}"
    )


class TestOracleEquivalence:
    def test_randomized_cases(self):
        rng = random.Random(20200501)
        for case in range(300):
            papers = random_store(rng)
            ast = random_query(rng)
            assert_engine_matches_oracle(papers, ast)

    def test_paper_queries_against_oracle(self, query_fixture_papers):
        for sql in PAPER_QUERIES:
            ast = parse_query(sql)
            assert_engine_matches_oracle(query_fixture_papers, ast)

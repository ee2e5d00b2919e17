import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from medlit import analytics
from medlit.analytics import (
    MentionRecord,
    TermSpec,
    align_series,
    chord_export,
    cooccurrence,
    extract_mentions,
    monthly_series,
    relative_shares,
    rollup,
    sankey_export,
    top_term_specs,
)
from medlit.model import EntityLink, PartialDate

from .conftest import ent, make_paper
from .oracles import cooccurrence_oracle


def mention(text="HCQ", negated=False, date="2020-03-01", umls="C0020336", title="t"):
    return MentionRecord(
        text=text,
        is_negated=negated,
        title=title,
        publish_time=PartialDate.parse(date) if date else None,
        umls_id=umls,
    )


def mentions_with_counts(count, negated_count, umls="C0020336", text="HCQ"):
    return [
        mention(text=text, negated=(i < negated_count), umls=umls) for i in range(count)
    ]


class TestExtractMentions:
    def test_first_umls_link_wins(self):
        papers = [
            make_paper(
                "a",
                entities=(
                    ent(0, "HCQ", umls="C0020336", extra_links=(EntityLink("ICD10CM", "X1"),)),
                ),
            )
        ]
        records = extract_mentions(papers, "MedicationName")
        assert records[0].umls_id == "C0020336"

    def test_empty_store(self):
        assert extract_mentions([], "MedicationName") == []

    def test_non_umls_link_only_gives_absent_id(self):
        from medlit.model import HealthEntity

        entity = HealthEntity(
            offset=0, length=3, text="foo", category="MedicationName",
            links=(EntityLink("ICD10CM", "A1"),),
        )
        papers = [make_paper("a", entities=(entity,))]
        records = extract_mentions(papers, "MedicationName")
        assert records[0].umls_id is None

    def test_category_filter(self):
        papers = [
            make_paper("a", entities=(ent(0, "HCQ"), ent(10, "COVID-19", "Diagnosis")))
        ]
        assert len(extract_mentions(papers, "Diagnosis")) == 1


class TestRollup:
    @pytest.mark.parametrize(
        "count,negated,expected",
        [(4846, 191, 0.039414), (1870, 38, 0.020321), (1201, 84, 0.069942)],
    )
    def test_negativity_table_rows(self, count, negated, expected):
        stats = rollup(mentions_with_counts(count, negated))
        assert len(stats) == 1
        assert stats[0].mention_count == count
        assert stats[0].negated_count == negated
        assert stats[0].negativity == pytest.approx(expected, abs=1e-6)

    def test_single_clean_mention(self):
        stats = rollup([mention()])
        assert stats[0].negativity == 0.0

    def test_groups_surface_variants_by_cui(self):
        records = (
            [mention(text="hydroxychloroquine")] * 3 + [mention(text="HCQ")] * 2
        )
        stats = rollup(records)
        assert len(stats) == 1
        assert stats[0].mention_count == 5
        assert stats[0].name == "hydroxychloroquine"
        assert stats[0].umls_id == "C0020336"

    def test_unlinked_grouped_by_folded_surface(self):
        records = [
            mention(text="Cytokine Storm", umls=None),
            mention(text="cytokine storm", umls=None),
        ]
        stats = rollup(records)
        assert len(stats) == 1
        assert stats[0].umls_id == "text:cytokine storm"

    def test_drop_unlinked(self):
        records = [mention(), mention(text="mystery", umls=None)]
        assert len(rollup(records, drop_unlinked=True)) == 1
        assert len(rollup(records)) == 2

    def test_sorted_by_count_desc(self):
        records = [mention()] * 2 + [mention(text="remdesivir", umls="C4726677")] * 5
        stats = rollup(records)
        assert [s.umls_id for s in stats] == ["C4726677", "C0020336"]

    def test_name_tie_first_encountered(self):
        records = [mention(text="HCQ"), mention(text="hcq")]
        stats = rollup(records)
        assert stats[0].name == "HCQ"

    @given(
        st.lists(
            st.tuples(st.sampled_from(["a", "b", None]), st.booleans()),
            max_size=40,
        )
    )
    def test_conservation_and_bounds(self, rows):
        records = [
            mention(text=f"t{u or 'x'}", umls=(f"C{u}" if u else None), negated=neg)
            for u, neg in rows
        ]
        stats = rollup(records)
        assert sum(s.mention_count for s in stats) == len(records)
        for s in stats:
            assert s.mention_count >= 1
            assert 0 <= s.negated_count <= s.mention_count
            assert 0.0 <= s.negativity <= 1.0
            assert (s.negativity == 0.0) == (s.negated_count == 0)


class TestMonthlySeries:
    def test_gap_months_materialized(self):
        records = [mention(date="2020-03-01")] * 3 + [mention(date="2020-05-20")]
        series, skipped = monthly_series(records, "C0020336")
        assert series.points == (("2020-03", 3), ("2020-04", 0), ("2020-05", 1))
        assert skipped == 0

    def test_no_dated_mentions(self):
        records = [mention(date=None), mention(date="2020")]  # absent and year-only
        series, skipped = monthly_series(records, "C0020336")
        assert series.points == ()
        assert skipped == 2

    def test_year_boundary(self):
        records = [mention(date="2020-12-05"), mention(date="2021-01-10")]
        series, _ = monthly_series(records, "C0020336")
        assert [m for m, _ in series.points] == ["2020-12", "2021-01"]

    def test_totals_match_dated_mentions(self):
        records = [mention(date=d) for d in ["2020-01-01", "2020-01-02", None, "2020-02-11", "2019"]]
        series, skipped = monthly_series(records, "C0020336")
        assert sum(c for _, c in series.points) == len(records) - skipped


class TestRelativeShares:
    def test_forced_arithmetic(self):
        s1 = analytics.MonthlySeries("a", (("2020-01", 3),))
        s2 = analytics.MonthlySeries("b", (("2020-01", 1),))
        table = relative_shares([s1, s2])
        assert table.shares[0][0] == pytest.approx(0.75)
        assert table.shares[1][0] == pytest.approx(0.25)

    def test_single_term_all_ones(self):
        s = analytics.MonthlySeries("a", (("2020-01", 2), ("2020-02", 7)))
        table = relative_shares([s])
        assert all(v == 1.0 for row in table.shares for v in row)

    def test_zero_month_flagged(self):
        s1 = analytics.MonthlySeries("a", (("2020-01", 1), ("2020-02", 0)))
        s2 = analytics.MonthlySeries("b", (("2020-01", 1), ("2020-02", 0)))
        table = relative_shares([s1, s2])
        assert table.zero_months == ("2020-02",)
        assert table.shares[0][1] == 0.0

    def test_misaligned_series_rejected(self):
        s1 = analytics.MonthlySeries("a", (("2020-01", 1),))
        s2 = analytics.MonthlySeries("b", (("2020-02", 1),))
        with pytest.raises(ValueError):
            relative_shares([s1, s2])
        aligned = align_series([s1, s2])
        assert [m for m, _ in aligned[0].points] == ["2020-01", "2020-02"]

    @settings(deadline=None)
    @given(st.lists(st.lists(st.integers(0, 9), min_size=4, max_size=4), min_size=1, max_size=6))
    def test_shares_sum_to_one(self, count_rows):
        months = ["2020-01", "2020-02", "2020-03", "2020-04"]
        series = [
            analytics.MonthlySeries(f"t{i}", tuple(zip(months, counts)))
            for i, counts in enumerate(count_rows)
        ]
        table = relative_shares(series)
        totals = np.array([[c for _, c in s.points] for s in series]).sum(axis=0)
        for j, month in enumerate(months):
            column = sum(row[j] for row in table.shares)
            if totals[j] == 0:
                assert month in table.zero_months
                assert column == 0.0
            else:
                assert column == pytest.approx(1.0, abs=1e-9)


HCQ = TermSpec("C0020336", "hydroxychloroquine", frozenset({"hcq", "hydroxychloroquine"}))
AZI = TermSpec("C0052796", "azithromycin", frozenset({"azithromycin"}))
COVID = TermSpec("C5203670", "COVID-19", frozenset({"covid-19"}))


def paper_with(pid, *texts_umls):
    entities = tuple(
        ent(i * 25, text, "MedicationName" if umls != "C5203670" else "Diagnosis", umls=umls)
        for i, (text, umls) in enumerate(texts_umls)
    )
    return make_paper(pid, entities=entities)


class TestCooccurrence:
    def test_same_terms_symmetric(self):
        papers = [
            paper_with("a", ("HCQ", "C0020336"), ("azithromycin", "C0052796")),
            paper_with("b", ("hydroxychloroquine", "C0020336")),
            paper_with("c", ("azithromycin", "C0052796"), ("HCQ", "C0020336")),
        ]
        matrix = cooccurrence(papers, [HCQ, AZI], [HCQ, AZI])
        assert np.array_equal(matrix.counts, matrix.counts.T)

    def test_binary_counting_ignores_multiplicity(self):
        papers = [
            paper_with("a", ("HCQ", "C0020336"), ("HCQ", "C0020336"), ("azithromycin", "C0052796"))
        ]
        matrix = cooccurrence(papers, [HCQ, AZI], [HCQ, AZI])
        assert matrix.counts[0, 1] == 1
        assert matrix.counts[1, 0] == 1

    def test_multiplicity_mode(self):
        papers = [
            paper_with("a", ("HCQ", "C0020336"), ("HCQ", "C0020336"), ("azithromycin", "C0052796"))
        ]
        matrix = cooccurrence(papers, [HCQ, AZI], [HCQ, AZI], binary=False)
        assert matrix.counts[0, 1] == 2

    def test_disjoint_corpora_zero_matrix(self):
        papers = [paper_with("a", ("HCQ", "C0020336")), paper_with("b", ("azithromycin", "C0052796"))]
        matrix = cooccurrence(papers, [HCQ], [AZI])
        assert matrix.counts.sum() == 0

    def test_surface_fallback_membership(self):
        papers = [paper_with("a", ("HCQ", None), ("azithromycin", "C0052796"))]
        matrix = cooccurrence(papers, [HCQ, AZI], [HCQ, AZI])
        assert matrix.counts[0, 1] == 1

    def test_matches_per_paper_intersection_oracle(self):
        import random

        rng = random.Random(99)
        pool = [("HCQ", "C0020336"), ("azithromycin", "C0052796"), ("COVID-19", "C5203670")]
        papers = []
        for i in range(20):
            k = rng.randrange(0, 4)
            papers.append(paper_with(f"p{i}", *[rng.choice(pool) for _ in range(k)]))
        terms = [HCQ, AZI, COVID]
        matrix = cooccurrence(papers, terms, terms)

        present = []
        for paper in papers:
            keys = {e.umls_id() for e in paper.entities}
            present.append([i for i, t in enumerate(terms) if t.key in keys])
        expected = cooccurrence_oracle(present, present, 3, 3)
        assert matrix.counts.tolist() == expected

    def test_cell_bounded_by_marginals(self):
        papers = [
            paper_with("a", ("HCQ", "C0020336"), ("azithromycin", "C0052796")),
            paper_with("b", ("HCQ", "C0020336")),
        ]
        matrix = cooccurrence(papers, [HCQ, AZI], [HCQ, AZI])
        diag = np.diag(matrix.counts)
        for i in range(2):
            for j in range(2):
                assert matrix.counts[i, j] <= min(diag[i], diag[j]) <= len(papers)


class TestExports:
    def test_sankey_empty(self):
        matrix = cooccurrence([], [HCQ], [COVID])
        export = sankey_export(matrix)
        assert export["links"] == []

    def test_sankey_single_link(self):
        papers = [paper_with("a", ("HCQ", "C0020336"), ("COVID-19", "C5203670"))]
        matrix = cooccurrence(papers, [HCQ, AZI], [COVID])
        export = sankey_export(matrix, top_n=2)
        assert len(export["links"]) == 1
        link = export["links"][0]
        assert link == {"source": "C0020336", "target": "C5203670", "value": 1}
        sides = {n["side"] for n in export["nodes"]}
        assert sides == {"row", "col"}

    def test_sankey_ordering_deterministic(self):
        papers = [
            paper_with("a", ("HCQ", "C0020336"), ("COVID-19", "C5203670")),
            paper_with("b", ("azithromycin", "C0052796"), ("COVID-19", "C5203670")),
            paper_with("c", ("azithromycin", "C0052796"), ("COVID-19", "C5203670")),
        ]
        matrix = cooccurrence(papers, [HCQ, AZI], [COVID])
        export = sankey_export(matrix, top_n=2)
        assert [n["key"] for n in export["nodes"] if n["side"] == "row"] == [
            "C0052796",
            "C0020336",
        ]
        assert export["links"][0]["value"] == 2

    def test_chord_zero_diagonal_symmetric(self):
        papers = [
            paper_with(f"p{i}", ("HCQ", "C0020336"), ("azithromycin", "C0052796"))
            for i in range(3)
        ]
        matrix = cooccurrence(papers, [HCQ, AZI], [HCQ, AZI])
        export = chord_export(matrix)
        grid = np.array(export["matrix"])
        assert np.array_equal(grid, grid.T)
        assert np.diag(grid).sum() == 0
        assert grid[0, 1] == 3 and grid[1, 0] == 3

    def test_chord_identity_input_zeros_out(self):
        papers = [paper_with("a", ("HCQ", "C0020336"))]
        matrix = cooccurrence(papers, [HCQ], [HCQ])
        export = chord_export(matrix)
        assert export["matrix"] == [[0]]

    def test_chord_requires_square(self):
        matrix = cooccurrence([], [HCQ], [AZI])
        with pytest.raises(ValueError):
            chord_export(matrix)

    def test_reruns_identical_bytes(self, query_fixture_papers):
        m1 = cooccurrence(query_fixture_papers, [HCQ, AZI], [HCQ, AZI])
        m2 = cooccurrence(query_fixture_papers, [HCQ, AZI], [HCQ, AZI])
        b1 = analytics.export_bytes(analytics.cooccurrence_export(m1))
        b2 = analytics.export_bytes(analytics.cooccurrence_export(m2))
        assert b1 == b2

    def test_matrix_csv_layout(self):
        papers = [paper_with("a", ("HCQ", "C0020336"), ("azithromycin", "C0052796"))]
        matrix = cooccurrence(papers, [HCQ, AZI], [HCQ, AZI])
        text = analytics.matrix_csv(matrix)
        lines = text.strip().splitlines()
        assert lines[0] == ",hydroxychloroquine,azithromycin"
        assert lines[1].startswith("hydroxychloroquine,")


class TestTopTermSpecs:
    def test_surfaces_collected_per_group(self, query_fixture_papers):
        specs = top_term_specs(query_fixture_papers, "MedicationName", 5)
        by_key = {s.key: s for s in specs}
        assert "hcq" in by_key["C0020336"].surfaces
        assert "hydroxychloroquine" in by_key["C0020336"].surfaces

"""Acceptance criteria for the primary component.

Each test prints one [ACCEPTANCE] pass line (run with -s to see them all)
and enforces its stated runtime budget. Expected values come from the
published example artifacts and from the independent oracles in this
package's test suite.
"""

import json
import random
import shutil
import time
from collections import Counter
from contextlib import contextmanager

import numpy as np
import pytest

from medlit import analytics
from medlit.analytics import TermSpec, cooccurrence, rollup
from medlit.cli import main as cli_main
from medlit.errors import RetriesExhaustedError
from medlit.extract import analyze_local
from medlit.gazetteer import bundled_gazetteer
from medlit.ingest import shard_filter
from medlit.mock_service import MockHealthService
from medlit.model import AnalyzedPaper
from medlit.pipeline import (
    LocalBackend,
    PipelineConfig,
    load_checkpoint,
    run_all,
    run_shard,
)
from medlit.query import evaluate, parse_query
from medlit.remote import HealthAnalysisClient, RetryPolicy
from medlit.sample import write_synthetic_corpus
from medlit.store import DocumentStore
from medlit.wire import parse_result_json, serialize_result_json

from .conftest import (
    EXAMPLE_ABSTRACT,
    EXAMPLE_RESULT_JSON,
    EXAMPLE_RESULT_JSON_SELF_CONTAINED,
    PAPER_QUERIES,
    ent,
    make_paper,
)
from .query_gen import random_query, random_store
from .query_oracle import _freeze, run_oracle
from .test_analytics import mentions_with_counts
from .test_pipeline import config_for, store_bytes_after_compact, write_metadata
from .test_query_eval import assert_engine_matches_oracle


@contextmanager
def criterion(number: int, name: str, budget_seconds: float):
    started = time.monotonic()
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] criterion {number} ({name}): FAIL")
        raise
    elapsed = time.monotonic() - started
    assert elapsed < budget_seconds, (
        f"criterion {number} took {elapsed:.2f}s, budget {budget_seconds}s"
    )
    print(f"[ACCEPTANCE] criterion {number} ({name}): PASS ({elapsed:.2f}s)")


def test_criterion_1_wire_schema_fidelity():
    with criterion(1, "wire-schema fidelity", 1.0):
        paper = parse_result_json(EXAMPLE_RESULT_JSON)
        first = paper.entities[0]
        assert (first.offset, first.length) == (24, 28)
        assert first.text == "coronavirus disease pandemic"
        assert first.category == "Diagnosis"
        assert first.confidence == 0.98
        assert first.is_negated is False
        covid = paper.entities[1]
        assert {(l.data_source, l.id) for l in covid.links} == {
            ("UMLS", "C5203670"),
            ("ICD10CM", "U07.1"),
        }
        # Round trip: byte-equivalent modulo field order. The excerpt's own
        # relation dangles (it points into the elided part of the original
        # document), so the self-contained variant carries the relation.
        emitted = serialize_result_json(
            parse_result_json(EXAMPLE_RESULT_JSON_SELF_CONTAINED), doc_index=2
        )
        assert json.loads(emitted) == json.loads(EXAMPLE_RESULT_JSON_SELF_CONTAINED)
        again = serialize_result_json(parse_result_json(emitted), doc_index=2)
        assert again == emitted


def test_criterion_2_annotated_abstract():
    with criterion(2, "annotated abstract", 1.0):
        entities, relations = analyze_local(EXAMPLE_ABSTRACT, bundled_gazetteer())
        med_texts = {e.text for e in entities if e.category == "MedicationName"}
        assert {"chloroquine", "CQ", "hydroxychloroquine", "HCQ"} <= med_texts
        pairs = set()
        for rel in relations:
            assert rel.relation_type == "Abbreviation"
            assert rel.bidirectional is True
            pairs.add(
                frozenset({entities[rel.source].text, entities[rel.target].text})
            )
        assert frozenset({"chloroquine", "CQ"}) in pairs
        assert frozenset({"hydroxychloroquine", "HCQ"}) in pairs


def test_criterion_3_negativity_formula():
    with criterion(3, "negativity formula", 5.0):
        for count, negated, expected in [
            (4846, 191, 0.039414),
            (1870, 38, 0.020321),
            (1201, 84, 0.069942),
        ]:
            stats = rollup(mentions_with_counts(count, negated))
            assert len(stats) == 1
            assert stats[0].mention_count == count
            assert stats[0].negated_count == negated
            assert stats[0].negativity == pytest.approx(expected, abs=1e-6)


def _twenty_paper_fixture() -> list[AnalyzedPaper]:
    rng = random.Random(4)
    papers = []
    for i in range(20):
        entities = []
        relations = ()
        if i % 4 != 3:
            entities.append(ent(0, "HCQ" if i % 2 else "hydroxychloroquine", umls="C0020336"))
        if i % 3 == 0:
            entities.append(ent(30, "azithromycin", umls="C0052796"))
        if i % 5 == 0:
            entities.append(ent(60, "COVID-19", "Diagnosis", umls="C5203670"))
        if i % 6 == 0:
            entities.append(ent(90, "cytokine storm", "Diagnosis"))
        if i % 7 == 2:
            entities.insert(0, ent(120, "400 mg", "Dosage"))
            entities.sort(key=lambda e: e.offset)
            dose = next(k for k, e in enumerate(entities) if e.category == "Dosage")
            med = next(
                (k for k, e in enumerate(entities) if e.category == "MedicationName"), None
            )
            if med is not None:
                from medlit.model import HealthRelation

                relations = (HealthRelation("DosageOfMedication", False, dose, med),)
        papers.append(
            make_paper(
                f"fx{i:02d}",
                date=rng.choice(["2020-01-10", "2020-03-05", None, "2020"]),
                entities=tuple(entities),
                relations=relations,
            )
        )
    return papers


def test_criterion_4_query_dialect():
    with criterion(4, "query dialect vs oracle", 60.0):
        fixture = _twenty_paper_fixture()
        docs = [p.to_document() for p in fixture]
        for sql in PAPER_QUERIES:
            ast = parse_query(sql)
            engine_rows = evaluate(ast, docs)
            oracle_rows = run_oracle(ast, docs)
            assert Counter(map(_freeze, engine_rows)) == Counter(map(_freeze, oracle_rows))
        rng = random.Random(16180339)
        for _ in range(1000):
            papers = random_store(rng)
            ast = random_query(rng)
            assert_engine_matches_oracle(papers, ast)


def test_criterion_5_shard_laws(tmp_path):
    with criterion(5, "shard laws and crash resume", 60.0):
        for nodes in range(1, 9):
            for index in range(1000):
                owners = [n for n in range(nodes) if shard_filter(index, n, nodes)]
                assert len(owners) == 1

        metadata = write_metadata(tmp_path, n=50, seed=11)
        parallel = config_for(
            tmp_path, metadata, nodes=8, node="all", backend="mock",
            store_root=tmp_path / "parallel",
        )
        run_all(parallel, workers=8)
        sequential = config_for(
            tmp_path, metadata, backend="mock", store_root=tmp_path / "sequential"
        )
        run_shard(sequential)
        par_store = DocumentStore.open_read(tmp_path / "parallel")
        seq_store = DocumentStore.open_read(tmp_path / "sequential")
        par_docs = {p.id: p for p in par_store.scan()}
        seq_docs = {p.id: p for p in seq_store.scan()}
        par_store.close()
        seq_store.close()
        assert par_docs == seq_docs

        # Crash after the checkpoint at document 20, resume, compare stores.
        crash_root = tmp_path / "crash"
        crash_config = config_for(
            tmp_path, metadata, store_root=crash_root, checkpoint_interval=10
        )

        class Exploding(LocalBackend):
            def __init__(self):
                super().__init__(bundled_gazetteer())
                self.seen = 0

            def analyze_many(self, records):
                self.seen += len(records)
                if self.seen > 20:
                    raise KeyboardInterrupt("kill")
                return super().analyze_many(records)

        with pytest.raises(KeyboardInterrupt):
            run_shard(crash_config, backend=Exploding())
        checkpoint = load_checkpoint(crash_root)
        assert checkpoint is not None and checkpoint.last_processed_index >= 0
        run_shard(crash_config)

        full_root = tmp_path / "uninterrupted"
        run_shard(config_for(tmp_path, metadata, store_root=full_root))
        assert store_bytes_after_compact(crash_root) == store_bytes_after_compact(full_root)


def test_criterion_6_cooccurrence_properties():
    with criterion(6, "co-occurrence properties", 10.0):
        hcq = TermSpec("C0020336", "hydroxychloroquine", frozenset({"hcq"}))
        azi = TermSpec("C0052796", "azithromycin", frozenset({"azithromycin"}))
        covid = TermSpec("C5203670", "COVID-19", frozenset({"covid-19"}))
        p1 = make_paper("h1", entities=(ent(0, "HCQ", umls="C0020336"),
                                        ent(10, "azithromycin", umls="C0052796")))
        p2 = make_paper("h2", entities=(ent(0, "HCQ", umls="C0020336"),))
        p3 = make_paper("h3", entities=(ent(0, "HCQ", umls="C0020336"),
                                        ent(10, "azithromycin", umls="C0052796"),
                                        ent(30, "COVID-19", "Diagnosis", umls="C5203670")))
        papers = [p1, p2, p3]
        terms = [hcq, azi, covid]
        matrix = cooccurrence(papers, terms, terms)
        # Hand-computed per-paper intersections.
        assert matrix.counts.tolist() == [[3, 2, 1], [2, 2, 1], [1, 1, 1]]
        assert np.array_equal(matrix.counts, matrix.counts.T)
        marginals = np.diag(matrix.counts)
        for i in range(3):
            for j in range(3):
                assert matrix.counts[i, j] <= min(marginals[i], marginals[j]) <= len(papers)
        chord = analytics.chord_export(matrix)
        grid = np.array(chord["matrix"])
        assert np.diag(grid).sum() == 0
        assert np.array_equal(grid, grid.T)


def test_criterion_7_retry_poll_protocol():
    with criterion(7, "retry/poll protocol", 30.0):
        sleeps: list[float] = []

        with MockHealthService(poll_statuses=["running", "running"]) as service:
            client = HealthAnalysisClient(service.endpoint, service.key)
            handle = client.submit([{"id": "d1", "text": "HCQ trial"}])
            body = client.poll(handle, RetryPolicy(jitter=0.0), sleep=sleeps.append)
            assert body["status"] == "succeeded"
            assert service.poll_count == 3

        sleeps.clear()
        with MockHealthService(fail_polls=[500] * 8) as service:
            client = HealthAnalysisClient(service.endpoint, service.key)
            handle = client.submit([{"id": "d1", "text": "HCQ trial"}])
            with pytest.raises(RetriesExhaustedError) as err:
                client.poll(
                    handle,
                    RetryPolicy(max_attempts=5, base_delay=1.0, multiplier=2.0, jitter=0.0),
                    sleep=sleeps.append,
                )
            assert service.poll_count == 5
            assert err.value.attempts == 5
            assert sleeps == [1.0, 2.0, 4.0, 8.0]


def _end_to_end_run(base_dir) -> dict[str, bytes]:
    base_dir.mkdir()
    metadata = base_dir / "metadata.csv"
    write_synthetic_corpus(metadata, n=50, seed=42)

    clean = base_dir / "clean.csv"
    assert cli_main(["ingest", "--metadata", str(metadata), "--out", str(clean)]) == 0

    shard_roots = []
    for shard in range(8):
        root = base_dir / f"shard{shard}"
        shard_roots.append(str(root))
        rc = cli_main([
            "process", "--data", str(clean), "--nodes", "8", "--number", str(shard),
            "--backend", "local", "--store", str(root),
        ])
        assert rc == 0
    merged = base_dir / "store"
    assert cli_main(["store", "merge", "--into", str(merged), *shard_roots]) == 0

    store = DocumentStore.open_read(merged)
    docs = list(store.documents())
    store.close()
    assert len(docs) == 50
    meds = evaluate(parse_query(PAPER_QUERIES[0]), docs)
    assert meds, "expected medication mentions in the synthetic corpus"

    exports = {}
    for name, argv in {
        "timeseries.json": ["export", "timeseries", "--store", str(merged),
                            "--term", "C0020336", "--out", str(base_dir / "timeseries.json")],
        "shares.json": ["export", "shares", "--store", str(merged), "--top", "5",
                        "--out", str(base_dir / "shares.json")],
        "chord.json": ["export", "chord", "--store", str(merged), "--top", "6",
                       "--out", str(base_dir / "chord.json")],
        "sankey.json": ["export", "sankey", "--store", str(merged), "--rows", "Diagnosis",
                        "--cols", "MedicationName", "--out", str(base_dir / "sankey.json")],
        "cooccur.json": ["export", "cooccur", "--store", str(merged), "--rows", "MedicationName",
                         "--cols", "MedicationName", "--out", str(base_dir / "cooccur.json")],
    }.items():
        assert cli_main(argv) == 0
        exports[name] = (base_dir / name).read_bytes()

    from fastapi.testclient import TestClient

    from medlit.api import create_app

    with TestClient(create_app(merged)) as client:
        categories = client.get("/categories").json()
        assert any(row["category"] == "MedicationName" for row in categories)
        api_ts = client.get("/terms/C0020336/timeseries").content
        assert api_ts == exports["timeseries.json"]
        body = client.post("/query", json={"sql": PAPER_QUERIES[0]}).json()
        assert sorted(r["text"] for r in body["rows"]) == sorted(r["text"] for r in meds)
    return exports


def test_criterion_8_end_to_end(tmp_path):
    with criterion(8, "end-to-end determinism", 30.0):
        first = _end_to_end_run(tmp_path / "run1")
        second = _end_to_end_run(tmp_path / "run2")
        assert first == second

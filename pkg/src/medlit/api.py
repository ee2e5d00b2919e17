"""Read-only HTTP facade over a loaded store snapshot.

All endpoints answer from one immutable snapshot; POST /admin/reload swaps
in a fresh one atomically (in-flight requests finish on the old snapshot).
Analytics endpoints return byte-for-byte what the CLI exporter writes for
the same snapshot.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Iterable

from fastapi import FastAPI, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import analytics
from .errors import QueryError, QuerySyntaxError
from .model import AnalyzedPaper, KNOWN_CATEGORIES, entity_term_key
from .query import evaluate, like_match, parse_query, projection_columns
from .store import DocumentStore

DEFAULT_ROW_CAP = 10_000


class Snapshot:
    """Immutable view of the store contents plus derived lookup tables."""

    def __init__(self, papers: list[AnalyzedPaper]):
        self.papers = papers
        self._documents = [p.to_document() for p in papers]
        self.category_counts: dict[str, int] = {}
        self.term_keys: set[str] = set()
        for paper in papers:
            for entity in paper.entities:
                self.category_counts[entity.category] = (
                    self.category_counts.get(entity.category, 0) + 1
                )
                self.term_keys.add(entity_term_key(entity))

    @classmethod
    def load(cls, store_root: str | Path) -> "Snapshot":
        with_store = DocumentStore.open_read(store_root)
        try:
            return cls(list(with_store.scan()))
        finally:
            with_store.close()

    def documents(self) -> Iterable[dict]:
        return self._documents


class QueryBody(BaseModel):
    sql: str


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"status": status, "code": code, "message": message}
    )


def _export_response(obj: dict) -> Response:
    return Response(content=analytics.export_bytes(obj), media_type="application/json")


def create_app(
    store_root: str | Path,
    cors_origin: str | None = None,
    ui_dir: str | Path | None = None,
    row_cap: int = DEFAULT_ROW_CAP,
) -> FastAPI:
    app = FastAPI(title="medlit corpus API", version="0.1.0")
    state = {"snapshot": Snapshot.load(store_root)}
    reload_lock = threading.Lock()

    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin] if cors_origin != "*" else ["*"],
            allow_methods=["GET", "POST"],
            allow_headers=["*"],
        )

    def snap() -> Snapshot:
        return state["snapshot"]

    @app.get("/categories")
    def categories():
        s = snap()
        rows = [
            {"category": cat, "count": count}
            for cat, count in sorted(s.category_counts.items())
        ]
        return JSONResponse(rows)

    @app.get("/entities")
    def entities(category: str, limit: int = 50, offset: int = 0):
        s = snap()
        if category not in KNOWN_CATEGORIES and category not in s.category_counts:
            return _error(400, "unknown_category", f"unknown category {category!r}")
        counts: dict[str, int] = {}
        umls: dict[str, str] = {}
        for paper in s.papers:
            for entity in paper.entities:
                if entity.category != category:
                    continue
                counts[entity.text] = counts.get(entity.text, 0) + 1
                cui = entity.umls_id()
                if cui and entity.text not in umls:
                    umls[entity.text] = cui
        ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
        page = ranked[offset : offset + limit]
        rows = []
        for text, count in page:
            row = {"text": text, "count": count}
            if text in umls:
                row["umls_id"] = umls[text]
            rows.append(row)
        return JSONResponse(rows)

    @app.get("/relations")
    def relations(
        type: str | None = None, target_like: str | None = None, limit: int = 100
    ):
        s = snap()
        rows = []
        for paper in s.papers:
            for rel in paper.relations:
                if type is not None and rel.relation_type != type:
                    continue
                target_text = paper.entities[rel.target].text
                if target_like is not None and not like_match(target_like, target_text):
                    continue
                rows.append(
                    {
                        "paper_title": paper.title,
                        "source_text": paper.entities[rel.source].text,
                        "target_text": target_text,
                        "relation_type": rel.relation_type,
                    }
                )
                if len(rows) >= limit:
                    return JSONResponse(rows)
        return JSONResponse(rows)

    @app.get("/terms/{key}/timeseries")
    def term_timeseries(key: str, category: str = "MedicationName"):
        s = snap()
        if key not in s.term_keys:
            return _error(404, "unknown_term", f"unknown term key {key!r}")
        mentions = analytics.extract_mentions(s.papers, category)
        series, skipped = analytics.monthly_series(mentions, key)
        return _export_response(analytics.timeseries_export(series, skipped))

    @app.get("/analytics/shares")
    def shares(k: int = 12, category: str = "MedicationName", drop_unlinked: bool = False):
        s = snap()
        mentions = analytics.extract_mentions(s.papers, category)
        stats = analytics.rollup(mentions, drop_unlinked=drop_unlinked)
        series = [
            analytics.monthly_series(mentions, stat.umls_id)[0] for stat in stats[:k]
        ]
        table = analytics.relative_shares(analytics.align_series(series))
        return _export_response(analytics.shares_export(table))

    @app.get("/analytics/cooccur")
    def cooccur(rows: str, cols: str, top: int = 10, drop_unlinked: bool = False):
        s = snap()
        for cat in (rows, cols):
            if cat not in KNOWN_CATEGORIES and cat not in s.category_counts:
                return _error(400, "unknown_category", f"unknown category {cat!r}")
        terms_a = analytics.top_term_specs(s.papers, rows, top, drop_unlinked)
        terms_b = analytics.top_term_specs(s.papers, cols, top, drop_unlinked)
        matrix = analytics.cooccurrence(s.papers, terms_a, terms_b)
        return _export_response(analytics.cooccurrence_export(matrix))

    @app.get("/analytics/sankey")
    def sankey(rows: str, cols: str, top: int = 10, drop_unlinked: bool = False):
        s = snap()
        for cat in (rows, cols):
            if cat not in KNOWN_CATEGORIES and cat not in s.category_counts:
                return _error(400, "unknown_category", f"unknown category {cat!r}")
        terms_a = analytics.top_term_specs(s.papers, rows, top, drop_unlinked)
        terms_b = analytics.top_term_specs(s.papers, cols, top, drop_unlinked)
        matrix = analytics.cooccurrence(s.papers, terms_a, terms_b)
        return _export_response(analytics.sankey_export(matrix))

    @app.get("/analytics/chord")
    def chord(category: str, top: int = 10, drop_unlinked: bool = False):
        s = snap()
        if category not in KNOWN_CATEGORIES and category not in s.category_counts:
            return _error(400, "unknown_category", f"unknown category {category!r}")
        terms = analytics.top_term_specs(s.papers, category, top, drop_unlinked)
        matrix = analytics.cooccurrence(s.papers, terms, terms)
        return _export_response(analytics.chord_export(matrix))

    @app.post("/query")
    def run_query(body: QueryBody):
        s = snap()
        try:
            ast = parse_query(body.sql)
        except QuerySyntaxError as exc:
            return JSONResponse(
                status_code=400,
                content={
                    "status": 400,
                    "code": "syntax_error",
                    "message": str(exc),
                    "line": exc.line,
                    "column": exc.column,
                },
            )
        except QueryError as exc:
            return _error(400, "semantic_error", str(exc))
        rows = evaluate(ast, s.documents())
        truncated = len(rows) > row_cap
        return JSONResponse(
            {
                "columns": projection_columns(ast),
                "rows": rows[:row_cap],
                "truncated": truncated,
            }
        )

    @app.get("/papers")
    def papers(entity_key: str, limit: int = 50):
        s = snap()
        hits = []
        for paper in s.papers:
            if any(entity_term_key(e) == entity_key for e in paper.entities):
                hits.append(paper)

        def sort_key(p: AnalyzedPaper):
            if p.publish_time is None:
                return (1, (0, 0, 0), p.id)
            y, m, d = p.publish_time.sort_key()
            return (0, (-y, -m, -d), p.id)

        hits.sort(key=sort_key)
        rows = [
            {
                "id": p.id,
                "title": p.title,
                "publish_time": str(p.publish_time) if p.publish_time else None,
            }
            for p in hits[:limit]
        ]
        return JSONResponse(rows)

    @app.post("/admin/reload")
    def reload():
        with reload_lock:
            state["snapshot"] = Snapshot.load(store_root)
        return JSONResponse({"reloaded": True, "papers": len(state["snapshot"].papers)})

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(
    store_root: str | Path,
    host: str = "127.0.0.1",
    port: int = 8080,
    cors_origin: str | None = None,
    ui_dir: str | Path | None = None,
) -> None:
    import uvicorn

    app = create_app(store_root, cors_origin=cors_origin, ui_dir=ui_dir)
    uvicorn.run(app, host=host, port=port, log_level="info")

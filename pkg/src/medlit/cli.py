"""Command-line entry points.

Subcommands: ingest, process, store (merge/compact), query, export, serve.
Exit codes: 0 success, 1 fatal error, 2 query syntax error,
3 completed with per-document failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import analytics
from .errors import MedlitError, QuerySemanticError, QuerySyntaxError
from .ingest import dedupe, parse_metadata, write_metadata_csv
from .pipeline import PipelineConfig, run_all, run_shard
from .query import evaluate, parse_query, projection_columns
from .remote import RetryPolicy
from .store import DocumentStore, merge as store_merge


def _cmd_ingest(args) -> int:
    with open(args.metadata, "rb") as fh:
        result = parse_metadata(fh)
    records, dropped_dupes = dedupe(result.records)
    with open(args.out, "w", encoding="utf-8", newline="") as out:
        written = write_metadata_csv(records, out)
    print(
        f"ingested {written} papers "
        f"({result.dropped_empty_id} rows without id, {dropped_dupes} duplicates dropped)"
    )
    return 0


def _cmd_process(args) -> int:
    node: int | str = "all" if args.number == "all" else int(args.number)
    config = PipelineConfig(
        metadata_path=Path(args.data),
        store_root=Path(args.store),
        backend=args.backend,
        nodes=args.nodes,
        node=node,
        gazetteer_path=Path(args.gazetteer) if args.gazetteer else None,
        retry=RetryPolicy(max_attempts=args.max_attempts),
        checkpoint_interval=args.checkpoint_interval,
        resume=not args.no_resume,
        retry_failed=args.retry_failed,
        canned_path=Path(args.canned) if args.canned else None,
        endpoint=args.endpoint,
        key=args.key,
    )
    if node == "all":
        reports = run_all(config, workers=args.workers)
    else:
        reports = [run_shard(config)]
    failed = sum(len(r.failed) for r in reports)
    for r in reports:
        print(
            f"shard {r.shard}: processed={r.processed} "
            f"empty_abstracts={r.skipped_empty_abstract} failed={len(r.failed)} "
            f"elapsed={r.elapsed:.2f}s"
        )
    return 3 if failed else 0


def _cmd_store(args) -> int:
    if args.store_cmd == "merge":
        count = store_merge(args.into, args.shards)
        print(f"merged {len(args.shards)} shard stores into {args.into}: {count} documents")
        return 0
    if args.store_cmd == "compact":
        with DocumentStore.open_write(args.root) as store:
            store.compact()
            print(f"compacted {args.root}: {store.doc_count} live documents")
        return 0
    raise AssertionError(args.store_cmd)


def _print_caret(sql: str, line: int, column: int) -> None:
    lines = sql.splitlines()
    if 1 <= line <= len(lines):
        print(lines[line - 1], file=sys.stderr)
        print(" " * (column - 1) + "^", file=sys.stderr)


def _cmd_query(args) -> int:
    try:
        ast = parse_query(args.sql)
    except QuerySyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        _print_caret(args.sql, exc.line, exc.column)
        return 2
    except QuerySemanticError as exc:
        print(f"semantic error: {exc}", file=sys.stderr)
        return 2
    store = DocumentStore.open_read(args.store)
    try:
        rows = evaluate(ast, store.documents())
    finally:
        store.close()
    columns = projection_columns(ast)
    if args.format == "jsonl":
        for row in rows:
            print(json.dumps(row, ensure_ascii=False))
    elif args.format == "csv":
        writer = csv.writer(sys.stdout)
        if columns is None:
            writer.writerow(["value"])
            for row in rows:
                writer.writerow([_csv_cell(row)])
        else:
            writer.writerow(columns)
            for row in rows:
                writer.writerow([_csv_cell(row.get(c)) for c in columns])
    else:
        _print_table(rows, columns)
    return 0


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (dict, list)):
        return json.dumps(value, ensure_ascii=False)
    return str(value)


def _print_table(rows, columns) -> None:
    if columns is None:
        for row in rows:
            print(json.dumps(row, ensure_ascii=False))
        print(f"({len(rows)} rows)")
        return
    headers = columns
    table = [[_csv_cell(row.get(c)) for c in headers] for row in rows]
    widths = [max(len(h), *(len(r[i]) for r in table)) if table else len(h) for i, h in enumerate(headers)]
    print("  ".join(h.ljust(w) for h, w in zip(headers, widths)))
    print("  ".join("-" * w for w in widths))
    for r in table:
        print("  ".join(cell.ljust(w) for cell, w in zip(r, widths)))
    print(f"({len(rows)} rows)")


def _cmd_export(args) -> int:
    store = DocumentStore.open_read(args.store)
    try:
        papers = list(store.scan())
    finally:
        store.close()
    out_path = Path(args.out)

    if args.what == "timeseries":
        mentions = analytics.extract_mentions(papers, args.category)
        series, skipped = analytics.monthly_series(mentions, args.term)
        payload = analytics.timeseries_export(series, skipped)
    elif args.what == "shares":
        mentions = analytics.extract_mentions(papers, args.category)
        stats = analytics.rollup(mentions, drop_unlinked=args.drop_unlinked)
        series = [
            analytics.monthly_series(mentions, stat.umls_id)[0]
            for stat in stats[: args.top]
        ]
        payload = analytics.shares_export(
            analytics.relative_shares(analytics.align_series(series))
        )
    elif args.what in ("cooccur", "sankey"):
        rows_cat = args.rows or args.category
        cols_cat = args.cols or args.category
        terms_a = analytics.top_term_specs(papers, rows_cat, args.top, args.drop_unlinked)
        terms_b = analytics.top_term_specs(papers, cols_cat, args.top, args.drop_unlinked)
        matrix = analytics.cooccurrence(papers, terms_a, terms_b)
        if args.what == "cooccur":
            if out_path.suffix == ".csv":
                out_path.write_text(analytics.matrix_csv(matrix), encoding="utf-8")
                print(f"wrote {out_path}")
                return 0
            payload = analytics.cooccurrence_export(matrix)
        else:
            payload = analytics.sankey_export(matrix)
    elif args.what == "chord":
        terms = analytics.top_term_specs(papers, args.category, args.top, args.drop_unlinked)
        matrix = analytics.cooccurrence(papers, terms, terms)
        if out_path.suffix == ".csv":
            chord = analytics.chord_export(matrix)
            import numpy as np

            zeroed = analytics.CooccurrenceMatrix(
                row_terms=tuple(chord["keys"]),
                col_terms=tuple(chord["keys"]),
                counts=np.array(chord["matrix"], dtype=np.int64),
                row_labels=tuple(chord["labels"]),
                col_labels=tuple(chord["labels"]),
            )
            out_path.write_text(analytics.matrix_csv(zeroed), encoding="utf-8")
            print(f"wrote {out_path}")
            return 0
        payload = analytics.chord_export(matrix)
    else:
        raise AssertionError(args.what)

    out_path.write_bytes(analytics.export_bytes(payload))
    print(f"wrote {out_path}")
    return 0


def _cmd_serve(args) -> int:
    from .api import serve

    serve(
        args.store,
        host=args.host,
        port=args.port,
        cors_origin=args.cors,
        ui_dir=args.ui_dir,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="medlit", description=__doc__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("ingest", help="validate and dedupe a metadata CSV")
    p.add_argument("--metadata", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("process", help="run the NER pipeline over a metadata shard")
    p.add_argument("--data", required=True, help="metadata CSV path")
    p.add_argument("--nodes", type=int, default=1)
    p.add_argument("--number", default="0", help="shard number, or 'all'")
    p.add_argument("--backend", choices=["local", "remote", "mock"], default="local")
    p.add_argument("--gazetteer", default=None)
    p.add_argument("--store", required=True, help="store root to write")
    p.add_argument("--workers", type=int, default=4, help="parallel shards when --number all")
    p.add_argument("--checkpoint-interval", type=int, default=25)
    p.add_argument("--max-attempts", type=int, default=5)
    p.add_argument("--no-resume", action="store_true")
    p.add_argument("--retry-failed", action="store_true")
    p.add_argument("--canned", default=None, help="mock backend: JSONL of wire documents")
    p.add_argument("--endpoint", default=None, help="remote backend endpoint (or TA_ENDPOINT)")
    p.add_argument("--key", default=None, help="remote backend key (or TA_KEY)")
    p.set_defaults(func=_cmd_process)

    p = sub.add_parser("store", help="store maintenance")
    store_sub = p.add_subparsers(dest="store_cmd", required=True)
    m = store_sub.add_parser("merge", help="merge shard stores into one")
    m.add_argument("--into", required=True)
    m.add_argument("shards", nargs="+")
    m.set_defaults(func=_cmd_store)
    c = store_sub.add_parser("compact", help="drop superseded document versions")
    c.add_argument("root")
    c.set_defaults(func=_cmd_store)

    p = sub.add_parser("query", help="run a SQL-dialect query against a store")
    p.add_argument("--store", required=True)
    p.add_argument("sql")
    p.add_argument("--format", choices=["table", "jsonl", "csv"], default="table")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("export", help="write analytics exports")
    p.add_argument("what", choices=["timeseries", "shares", "cooccur", "sankey", "chord"])
    p.add_argument("--store", required=True)
    p.add_argument("--category", default="MedicationName")
    p.add_argument("--term", default=None, help="term key for timeseries")
    p.add_argument("--rows", default=None, help="row category for cooccur/sankey")
    p.add_argument("--cols", default=None, help="column category for cooccur/sankey")
    p.add_argument("--top", type=int, default=12)
    p.add_argument("--drop-unlinked", action="store_true")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_export)

    p = sub.add_parser("serve", help="serve the HTTP API over a store snapshot")
    p.add_argument("--store", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--cors", default=None, help="allowed dashboard origin")
    p.add_argument("--ui-dir", default=None, help="static dashboard bundle to mount at /ui")
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.cmd == "export" and args.what == "timeseries" and not args.term:
        print("export timeseries requires --term", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except MedlitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

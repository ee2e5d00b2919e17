"""In-process mock of the hosted health-analysis service.

Implements the job protocol bit-for-bit: POST to the jobs path with the
subscription-key header returns 202 plus an ``operation-location``; GET on
that location reports ``{"status": ...}`` and, once succeeded, the result
envelope ``{"status": "succeeded", "results": {"documents": [...]}}``
with documents in the wire schema.

Behavior is scriptable for protocol tests: canned result documents per
paper id, a queue of poll statuses, and queues of forced HTTP status
codes for submits and polls.
"""

from __future__ import annotations

import json
import threading
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Callable, Mapping
from urllib.parse import urlparse

from .extract import analyze_local
from .gazetteer import bundled_gazetteer
from .model import AnalyzedPaper
from .remote import KEY_HEADER
from .wire import paper_to_wire

_JOBS_BASE = "/text/analytics/v3.1/entities/health/jobs"


def _default_analyzer(doc_id: str, text: str) -> dict:
    entities, relations = analyze_local(text, bundled_gazetteer())
    paper = AnalyzedPaper(id=doc_id, title="", entities=entities, relations=relations)
    return paper_to_wire(paper)


class MockHealthService:
    """Scriptable stand-in for the hosted service. Use as a context manager."""

    def __init__(
        self,
        key: str = "mock-key",
        canned: Mapping[str, dict] | None = None,
        analyzer: Callable[[str, str], dict] | None = None,
        poll_statuses: list[str] | None = None,
        fail_submits: list[int] | None = None,
        fail_polls: list[int] | None = None,
        retry_after: float | None = None,
    ):
        self.key = key
        self.canned = dict(canned or {})
        self.analyzer = analyzer or _default_analyzer
        self.poll_statuses = list(poll_statuses or [])
        self.fail_submits = list(fail_submits or [])
        self.fail_polls = list(fail_polls or [])
        self.retry_after = retry_after
        self.submit_count = 0
        self.poll_count = 0
        self._jobs: dict[str, list[dict]] = {}
        self._job_polls: dict[str, int] = {}
        self._lock = threading.Lock()
        self._server: ThreadingHTTPServer | None = None
        self._thread: threading.Thread | None = None

    # -- lifecycle -------------------------------------------------------

    def start(self) -> str:
        service = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args):
                pass

            def do_POST(self):
                service._handle_submit(self)

            def do_GET(self):
                service._handle_poll(self)

        self._server = ThreadingHTTPServer(("127.0.0.1", 0), Handler)
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()
        return self.endpoint

    @property
    def endpoint(self) -> str:
        assert self._server is not None, "service not started"
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def stop(self) -> None:
        if self._server is not None:
            self._server.shutdown()
            self._server.server_close()
            self._server = None

    def __enter__(self) -> "MockHealthService":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()

    # -- request handling --------------------------------------------------

    def _send(self, handler: BaseHTTPRequestHandler, status: int, body: dict | None = None, headers: dict | None = None):
        payload = json.dumps(body).encode("utf-8") if body is not None else b""
        handler.send_response(status)
        for name, value in (headers or {}).items():
            handler.send_header(name, value)
        handler.send_header("Content-Type", "application/json")
        handler.send_header("Content-Length", str(len(payload)))
        handler.end_headers()
        if payload:
            handler.wfile.write(payload)

    def _check_key(self, handler: BaseHTTPRequestHandler) -> bool:
        return handler.headers.get(KEY_HEADER) == self.key

    def _handle_submit(self, handler: BaseHTTPRequestHandler) -> None:
        with self._lock:
            self.submit_count += 1
            forced = self.fail_submits.pop(0) if self.fail_submits else None
        if urlparse(handler.path).path != _JOBS_BASE:
            self._send(handler, 404, {"error": "unknown path"})
            return
        if not self._check_key(handler):
            self._send(handler, 401, {"error": "invalid subscription key"})
            return
        if forced is not None:
            headers = {}
            if self.retry_after is not None:
                headers["Retry-After"] = str(self.retry_after)
            self._send(handler, forced, {"error": f"forced {forced}"}, headers)
            return
        length = int(handler.headers.get("Content-Length", "0"))
        body = json.loads(handler.rfile.read(length) or b"{}")
        documents = body.get("documents", [])
        results = []
        for i, doc in enumerate(documents):
            doc_id = doc.get("id", "")
            result = self.canned.get(doc_id)
            if result is None:
                result = self.analyzer(doc_id, doc.get("text", ""))
            result = dict(result)
            result["id"] = doc_id
            result = _renumber_pointers(result, i)
            results.append(result)
        job_id = uuid.uuid4().hex
        with self._lock:
            self._jobs[job_id] = results
            self._job_polls[job_id] = 0
        location = f"{self.endpoint}{_JOBS_BASE}/{job_id}"
        self._send(handler, 202, {"status": "notStarted"}, {"operation-location": location})

    def _handle_poll(self, handler: BaseHTTPRequestHandler) -> None:
        with self._lock:
            self.poll_count += 1
            forced = self.fail_polls.pop(0) if self.fail_polls else None
        if not self._check_key(handler):
            self._send(handler, 401, {"error": "invalid subscription key"})
            return
        if forced is not None:
            headers = {}
            if self.retry_after is not None:
                headers["Retry-After"] = str(self.retry_after)
            self._send(handler, forced, {"error": f"forced {forced}"}, headers)
            return
        job_id = urlparse(handler.path).path.rsplit("/", 1)[-1]
        with self._lock:
            if job_id not in self._jobs:
                self._send(handler, 404, {"error": f"unknown job {job_id}"})
                return
            poll_no = self._job_polls[job_id]
            self._job_polls[job_id] += 1
            if poll_no < len(self.poll_statuses):
                status = self.poll_statuses[poll_no]
            else:
                status = "succeeded"
            documents = self._jobs[job_id]
        if status == "succeeded":
            self._send(
                handler,
                200,
                {"status": "succeeded", "results": {"documents": documents, "errors": []}},
            )
        elif status == "failed":
            self._send(handler, 200, {"status": "failed", "errors": [{"message": "scripted failure"}]})
        else:
            self._send(handler, 200, {"status": status})


def _renumber_pointers(document: dict, doc_index: int) -> dict:
    """Rewrite relation pointers to carry the batch position of the document."""
    relations = []
    for rel in document.get("relations", []):
        rel = dict(rel)
        for field in ("source", "target"):
            value = rel.get(field, "")
            if isinstance(value, str) and value.startswith("#/results/documents/"):
                suffix = value.split("/entities/", 1)
                if len(suffix) == 2:
                    rel[field] = f"#/results/documents/{doc_index}/entities/{suffix[1]}"
        relations.append(rel)
    out = dict(document)
    out["relations"] = relations
    return out

"""Client for the hosted health-analysis REST job protocol.

A batch of documents is POSTed to
``{endpoint}/text/analytics/v3.1/entities/health/jobs?model-version=v3.1``
with the subscription key header; the job is then polled via the returned
operation-location until it succeeds or fails. 401 is fatal; 429 and 5xx
are retried with exponential backoff.

Time is injectable (`sleep`, `rng`) so tests can run against a virtual
clock.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence, TypeVar

import requests

from .errors import (
    AuthError,
    JobFailedError,
    RetriesExhaustedError,
    RetryableServiceError,
)

JOBS_PATH = "/text/analytics/v3.1/entities/health/jobs?model-version=v3.1"
KEY_HEADER = "Ocp-Apim-Subscription-Key"

T = TypeVar("T")


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 5
    base_delay: float = 1.0
    multiplier: float = 2.0
    jitter: float = 0.2  # +-20% of the nominal delay

    def delay(self, attempt: int, rng: random.Random | None = None) -> float:
        """Nominal backoff before retry number `attempt` (0-based)."""
        nominal = self.base_delay * self.multiplier**attempt
        if rng is not None and self.jitter:
            nominal *= 1.0 + rng.uniform(-self.jitter, self.jitter)
        return nominal


def with_retry(
    action: Callable[[], T],
    policy: RetryPolicy = RetryPolicy(),
    sleep: Callable[[float], None] = time.sleep,
    rng: random.Random | None = None,
) -> T:
    """Run `action`, retrying RetryableServiceError with backoff.

    Any other exception propagates immediately. A retryable error on the
    final attempt is wrapped in RetriesExhaustedError with the attempt
    count.
    """
    last: Exception | None = None
    for attempt in range(policy.max_attempts):
        try:
            return action()
        except RetryableServiceError as exc:
            last = exc
            if attempt + 1 >= policy.max_attempts:
                break
            delay = exc.retry_after if exc.retry_after is not None else policy.delay(attempt, rng)
            sleep(delay)
    raise RetriesExhaustedError("retries exhausted", policy.max_attempts, last)


@dataclass(frozen=True)
class JobHandle:
    """Opaque handle on a submitted analysis job (the operation-location URL)."""

    operation_location: str
    key: str


class HealthAnalysisClient:
    """Thin wrapper over the REST protocol; one instance per endpoint."""

    def __init__(
        self,
        endpoint: str,
        key: str,
        session: requests.Session | None = None,
        timeout: float = 30.0,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.key = key
        self.session = session or requests.Session()
        self.timeout = timeout

    def submit(self, documents: Sequence[Mapping[str, str]]) -> JobHandle:
        return submit_remote(documents, self.endpoint, self.key, self.session, self.timeout)

    def poll(
        self,
        handle: JobHandle,
        policy: RetryPolicy = RetryPolicy(),
        sleep: Callable[[float], None] = time.sleep,
        rng: random.Random | None = None,
    ) -> dict:
        return poll_job(handle, policy, session=self.session, sleep=sleep, rng=rng, timeout=self.timeout)


def _classify_response(resp: requests.Response, context: str) -> None:
    """Raise the right error class for a non-2xx response."""
    if resp.status_code == 401:
        raise AuthError(f"{context}: authentication rejected (401)")
    if resp.status_code == 429 or resp.status_code >= 500:
        retry_after = None
        header = resp.headers.get("Retry-After")
        if header is not None:
            try:
                retry_after = float(header)
            except ValueError:
                retry_after = None
        raise RetryableServiceError(
            f"{context}: transient service error {resp.status_code}",
            retry_after=retry_after,
            status=resp.status_code,
        )
    if not resp.ok:
        raise JobFailedError(f"{context}: unexpected status {resp.status_code}")


def submit_remote(
    documents: Sequence[Mapping[str, str]],
    endpoint: str,
    key: str,
    session: requests.Session | None = None,
    timeout: float = 30.0,
) -> JobHandle:
    """POST a batch of at most 10 {id, text} documents; return the job handle.

    Error messages never contain the subscription key.
    """
    if not documents:
        raise ValueError("cannot submit an empty batch")
    if len(documents) > 10:
        raise ValueError(f"batch too large: {len(documents)} > 10 documents")
    for doc in documents:
        if not doc.get("id") or not doc.get("text"):
            raise ValueError("every document needs an id and non-empty text")
    session = session or requests.Session()
    url = endpoint.rstrip("/") + JOBS_PATH
    payload = {
        "documents": [
            {"id": doc["id"], "language": doc.get("language", "en"), "text": doc["text"]}
            for doc in documents
        ]
    }
    resp = session.post(url, headers={KEY_HEADER: key}, json=payload, timeout=timeout)
    _classify_response(resp, f"submit to {endpoint}")
    location = resp.headers.get("operation-location") or resp.headers.get("Operation-Location")
    if not location:
        raise JobFailedError("submit succeeded but no operation-location header returned")
    return JobHandle(operation_location=location, key=key)


def poll_job(
    handle: JobHandle,
    policy: RetryPolicy = RetryPolicy(),
    session: requests.Session | None = None,
    sleep: Callable[[float], None] = time.sleep,
    rng: random.Random | None = None,
    timeout: float = 30.0,
) -> dict:
    """GET the operation-location until the job succeeds.

    Both still-running statuses and transient HTTP errors consume attempts
    from the policy budget, waiting the backoff delay in between. A
    "failed" status raises JobFailedError; an exhausted budget raises
    RetriesExhaustedError after exactly `max_attempts` requests.
    """
    session = session or requests.Session()
    last: Exception | None = None
    for attempt in range(policy.max_attempts):
        try:
            resp = session.get(
                handle.operation_location,
                headers={KEY_HEADER: handle.key},
                timeout=timeout,
            )
            _classify_response(resp, "poll job")
            body = resp.json()
            status = body.get("status")
            if status == "succeeded":
                return body
            if status == "failed":
                errors = body.get("errors") or body.get("error") or "no details"
                raise JobFailedError(f"analysis job failed: {errors}")
            last = RetryableServiceError(f"job still {status or 'pending'}")
        except RetryableServiceError as exc:
            last = exc
        if attempt + 1 >= policy.max_attempts:
            break
        delay = None
        if isinstance(last, RetryableServiceError) and last.retry_after is not None:
            delay = last.retry_after
        sleep(delay if delay is not None else policy.delay(attempt, rng))
    raise RetriesExhaustedError("job did not complete", policy.max_attempts, last)

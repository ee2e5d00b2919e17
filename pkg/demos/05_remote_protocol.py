#!/usr/bin/env python3
"""The REST job protocol against the in-process mock service.

    python3 demos/05_remote_protocol.py
"""

from medlit.errors import RetriesExhaustedError, RetryableServiceError
from medlit.mock_service import MockHealthService
from medlit.remote import HealthAnalysisClient, RetryPolicy, with_retry
from medlit.wire import paper_from_wire

# ---------------------------------------------------------------------------
# 1. Submit a batch, poll until succeeded. The mock speaks the real wire
#    protocol: POST /text/analytics/v3.1/entities/health/jobs, subscription
#    key header, operation-location, then GET until status == succeeded.
# ---------------------------------------------------------------------------

with MockHealthService(poll_statuses=["running", "running"]) as service:
    client = HealthAnalysisClient(service.endpoint, service.key)
    handle = client.submit([
        {"id": "d1", "text": "hydroxychloroquine (HCQ) was tested against COVID-19."},
        {"id": "d2", "text": "no chloroquine was given."},
    ])
    print("operation-location:", handle.operation_location)
    body = client.poll(handle, RetryPolicy(base_delay=0.01))
    print(f"job finished after {service.poll_count} polls")
    for doc in body["results"]["documents"]:
        paper = paper_from_wire(doc)
        texts = [(e.text, e.category, e.is_negated) for e in paper.entities]
        print(f"  {doc['id']}: {texts}")

# ---------------------------------------------------------------------------
# 2. Retry with exponential backoff. A virtual clock records the delays
#    instead of sleeping.
# ---------------------------------------------------------------------------

sleeps = []
attempts = {"n": 0}


def flaky():
    attempts["n"] += 1
    if attempts["n"] < 3:
        raise RetryableServiceError("503 from service")
    return "analysis result"


result = with_retry(flaky, RetryPolicy(max_attempts=5, jitter=0.0), sleep=sleeps.append)
print(f"\nflaky action succeeded on call {attempts['n']}, backoff delays {sleeps}")

# Exhaustion: five consecutive 500s consume a max_attempts=5 budget.
sleeps.clear()
with MockHealthService(fail_polls=[500] * 8) as service:
    client = HealthAnalysisClient(service.endpoint, service.key)
    handle = client.submit([{"id": "d1", "text": "text"}])
    try:
        client.poll(handle, RetryPolicy(max_attempts=5, jitter=0.0), sleep=sleeps.append)
    except RetriesExhaustedError as exc:
        print(f"gave up: {exc}")
        print(f"requests made: {service.poll_count}, spacing: {sleeps}")

#!/usr/bin/env python3
"""Serve the HTTP API over a snapshot and explore it as a client would.

    python3 demos/06_http_api.py
"""

import tempfile
import threading
import time
from pathlib import Path

import requests
import uvicorn

from medlit.api import create_app
from medlit.pipeline import PipelineConfig, run_shard
from medlit.sample import write_synthetic_corpus

workdir = Path(tempfile.mkdtemp(prefix="medlit-demo-"))
metadata = workdir / "metadata.csv"
write_synthetic_corpus(metadata, n=50, seed=42)
run_shard(PipelineConfig(metadata_path=metadata, store_root=workdir / "store"))

app = create_app(workdir / "store", cors_origin="*")
server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=8123, log_level="warning"))
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.05)

base = "http://127.0.0.1:8123"
print("categories:")
for row in requests.get(f"{base}/categories").json():
    print(f"  {row['category']:<18} {row['count']}")

print("\ntop medication surface forms:")
for row in requests.get(f"{base}/entities", params={"category": "MedicationName", "limit": 5}).json():
    print(f"  {row['text']:<22} count={row['count']} umls={row.get('umls_id', '-')}")

print("\nSQL over HTTP:")
sql = "SELECT DISTINCT e.text FROM papers p JOIN e IN p.entities WHERE e.category='MedicationName'"
body = requests.post(f"{base}/query", json={"sql": sql}).json()
print("  columns:", body["columns"])
print("  first rows:", body["rows"][:4])

print("\ntime series for hydroxychloroquine (C0020336):")
print(" ", requests.get(f"{base}/terms/C0020336/timeseries").json()["points"][:4])

server.should_exit = True
thread.join(timeout=5)
print("\nserver stopped")

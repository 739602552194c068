"""Run the HTTP service end to end: submit, crawl, query, measure.

Boots the API with its background crawl worker against a local demo site,
submits the platform through POST /api/crawl, waits for the worker to index
it, then queries and reads the runtime metrics the way the benchmark table
does.

    python demos/04_service_and_benchmark.py
"""
import sys
import tempfile
import time

sys.path.insert(0, "demos")
from _fixture_site import start_demo_site

from fastapi.testclient import TestClient

from tosqa.config import AppConfig
from tosqa.service import create_app

base_url, stop = start_demo_site()
config = AppConfig(data_dir=tempfile.mkdtemp(prefix="tosqa-demo-"),
                   poll_interval_ms=100, politeness_delay_ms=50)
app = create_app(config, start_worker=True)

with TestClient(app) as client:
    submitted = client.post("/api/crawl", json={"url": base_url + "/"}).json()
    platform_id = submitted["platform_id"]
    print(f"submitted {base_url} as platform {platform_id!r} "
          f"(queue entry {submitted['entry_id']})")

    while True:
        status = client.get(f"/api/platforms/{platform_id}").json()
        print(f"  status: {status['status']}")
        if status["status"] in ("indexed", "failed"):
            break
        time.sleep(0.3)

    print(f"\nindexed {status['sentence_count']} sentences "
          f"from {len(status['source_urls'])} pages\n")

    question = "Does this service share my data with third parties?"
    for run in range(1, 6):
        body = client.post("/api/query", json={
            "platform_id": platform_id, "question": question}).json()
        m = body["metrics"]
        print(f"run {run}: latency {m['latency_ms']:.1f} ms, "
              f"timing {m['timing_ms']:.1f} ms, cpu {m['cpu_percent']:.0f}%, "
              f"ram {m['ram_percent']:.0f}%")

    print(f"\nQ: {question}")
    print(f"A: {body['answer']}" if body["accepted"] else f"A: {body['fallback']}")
    print(f"   similarity={body['similarity']:.3f} relevance={body['relevance']:.3f}")

    summary = client.get("/api/metrics").json()
    print(f"\nservice metrics: {summary['count']} queries, "
          f"mean latency {summary['mean_latency_ms']:.1f} ms, "
          f"mean timing {summary['mean_timing_ms']:.1f} ms")

stop()

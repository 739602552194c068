"""HTTP service: query/status/submit endpoints plus the crawl worker loop.

The query path never touches the network: it reads pre-encoded sentence
vectors from the store, so answering stays fast and isolated from crawling.
A single background worker drains the crawl queue FIFO and a scheduler tick
re-enqueues stale platforms.
"""
from __future__ import annotations

import logging
import re
import threading
import time
from collections import deque
from contextlib import asynccontextmanager
from datetime import datetime, timedelta, timezone
from typing import Optional

import psutil
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .config import AppConfig
from .crawler import CrawlConfig, crawl_site, merge_pages
from .embedding import make_backend
from .errors import BackendUnavailable, EmptyText, InvalidUrl, TosQaError
from .qa import DocumentIndex, QaConfig, answer_query_timed
from .store import TosStore, validate_absolute_url

logger = logging.getLogger(__name__)

METRICS_WINDOW = 256

_MULTIPART_TLDS = {"co", "com", "org", "net", "gov", "edu", "ac"}
_SLUG_RE = re.compile(r"[^a-z0-9-]+")


def derive_platform_id(url: str) -> str:
    """Slug from the registrable domain: https://www.example.com/x -> example-com.

    IP-address hosts keep all their octets.
    """
    validate_absolute_url(url)
    host = url.split("//", 1)[1].split("/", 1)[0].split(":")[0].lower()
    if host.startswith("www."):
        host = host[4:]
    parts = host.split(".")
    if not all(p.isdigit() for p in parts):
        if len(parts) > 2 and parts[-2] in _MULTIPART_TLDS and len(parts[-1]) == 2:
            parts = parts[-3:]
        elif len(parts) > 2:
            parts = parts[-2:]
    slug = _SLUG_RE.sub("-", "-".join(parts)).strip("-")
    if not slug:
        raise InvalidUrl(f"cannot derive a platform id from {url!r}")
    return slug


class QueryRequest(BaseModel):
    platform_id: str
    question: str
    tau: Optional[float] = None


class SubmitRequest(BaseModel):
    url: str
    display_name: Optional[str] = None


class MetricsRecorder:
    """Ring buffer of per-query runtime metrics."""

    def __init__(self, window: int = METRICS_WINDOW):
        self._window = deque(maxlen=window)
        self._lock = threading.Lock()
        psutil.cpu_percent(None)  # prime the sampler

    def sample(self, latency_ms: float, timing_ms: float) -> dict:
        record = {
            "latency_ms": latency_ms,
            "timing_ms": timing_ms,
            "cpu_percent": psutil.cpu_percent(None),
            "ram_percent": psutil.virtual_memory().percent,
            "sampled_at": datetime.now(timezone.utc).isoformat(),
        }
        with self._lock:
            self._window.append(record)
        return record

    def summary(self) -> dict:
        with self._lock:
            records = list(self._window)
        out = {"count": len(records), "recent": records}
        if records:
            out["mean_latency_ms"] = sum(r["latency_ms"] for r in records) / len(records)
            out["mean_timing_ms"] = sum(r["timing_ms"] for r in records) / len(records)
        return out


class CrawlWorker(threading.Thread):
    """Polls the crawl queue and runs one job at a time."""

    def __init__(self, store: TosStore, backend, config: AppConfig):
        super().__init__(name="tosqa-crawl-worker", daemon=True)
        self.store = store
        self.backend = backend
        self.config = config
        self.stop_event = threading.Event()
        self._last_scheduler_tick = 0.0

    def run(self) -> None:
        poll_s = self.config.poll_interval_ms / 1000.0
        scheduler_s = self.config.scheduler_interval_ms / 1000.0
        while not self.stop_event.is_set():
            now = time.monotonic()
            if now - self._last_scheduler_tick >= scheduler_s:
                self._last_scheduler_tick = now
                try:
                    created = self.store.schedule_recrawls()
                    if created:
                        logger.info("scheduled %d re-crawls", len(created))
                except Exception:
                    logger.exception("recrawl scheduling failed")
            entry = self.store.dequeue()
            if entry is None:
                self.stop_event.wait(poll_s)
                continue
            self._process(entry)

    def _process(self, entry) -> None:
        logger.info("crawling %s (%s)", entry.platform_id, entry.seed_url)
        try:
            self.store.set_status(entry.platform_id, "crawling")
            crawl_cfg = CrawlConfig(
                seed_url=entry.seed_url,
                max_depth=self.config.crawl_max_depth,
                max_pages=self.config.crawl_max_pages,
                politeness_delay_ms=self.config.politeness_delay_ms,
                honor_robots=self.config.honor_robots,
                language_filter=self.config.language_filter,
            )
            pages = crawl_site(crawl_cfg)
            merged, source_urls = merge_pages(pages)
            self.store.encode_and_store(entry.platform_id, merged, source_urls, self.backend)
            logger.info("indexed %s (%d pages kept)", entry.platform_id, len(source_urls))
        except TosQaError as exc:
            logger.warning("crawl failed for %s: %s", entry.platform_id, exc)
            self._mark_failed(entry.platform_id, str(exc))
        except Exception as exc:  # job isolation: the loop must survive anything
            logger.exception("unexpected crawl failure for %s", entry.platform_id)
            self._mark_failed(entry.platform_id, f"internal error: {exc}")

    def _mark_failed(self, platform_id: str, reason: str) -> None:
        try:
            self.store.set_status(platform_id, "failed", failure_reason=reason)
        except Exception:
            logger.exception("could not record failure for %s", platform_id)

    def stop(self, timeout: float = 5.0) -> None:
        self.stop_event.set()
        self.join(timeout=timeout)


def _error(status_code: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status_code, content={"code": code, "message": message})


def create_app(config: Optional[AppConfig] = None, store: Optional[TosStore] = None,
               backend=None, start_worker: bool = True) -> FastAPI:
    config = config or AppConfig.from_env()
    store = store or TosStore(config.data_dir)
    backend = backend or make_backend(config.backend)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        if start_worker:
            app.state.worker = CrawlWorker(store, backend, config)
            app.state.worker.start()
        yield
        worker = getattr(app.state, "worker", None)
        if worker is not None:
            worker.stop()

    app = FastAPI(title="tos-qa-engine", version="0.1.0", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=config.cors_origins,
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store
    app.state.backend = backend
    app.state.config = config
    app.state.metrics = MetricsRecorder()
    app.state.index_cache = {}
    app.state.index_lock = threading.Lock()

    @app.middleware("http")
    async def stamp_receipt(request: Request, call_next):
        request.state.received_at = time.perf_counter()
        return await call_next(request)

    def load_index(platform_id: str, content_hash: str) -> DocumentIndex:
        with app.state.index_lock:
            cached = app.state.index_cache.get(platform_id)
            if cached is not None and cached[0] == content_hash:
                return cached[1]
        doc = store.load_document(platform_id)
        index = DocumentIndex.from_document(doc, backend=backend)
        with app.state.index_lock:
            app.state.index_cache[platform_id] = (content_hash, index)
        return index

    @app.post("/api/query")
    async def handle_query(req: QueryRequest, request: Request):
        if not req.question.strip():
            return _error(422, "empty_question", "question must be non-empty")
        platform = store.get_platform(req.platform_id)
        if platform is None or platform.status != "indexed" or not platform.document_meta:
            return _error(404, "platform_not_indexed",
                          f"platform {req.platform_id!r} is not indexed")
        try:
            index = load_index(req.platform_id, platform.document_meta["content_hash"])
            qa_cfg = QaConfig(tau=req.tau if req.tau is not None else config.tau)
            timed = answer_query_timed(req.question, index, qa_cfg)
        except EmptyText:
            return _error(422, "empty_question", "question has no word tokens")
        except BackendUnavailable as exc:
            return _error(503, "backend_unavailable", str(exc))
        latency_ms = (time.perf_counter() - request.state.received_at) * 1000.0
        metrics = app.state.metrics.sample(latency_ms=latency_ms, timing_ms=timed.timing_ms)
        payload = timed.answer.to_dict()
        payload["platform_id"] = req.platform_id
        payload["metrics"] = metrics
        return JSONResponse(payload)

    @app.get("/api/platforms")
    async def list_platforms():
        return [
            {
                "platform_id": p.platform_id,
                "display_name": p.display_name,
                "status": p.status,
                "last_crawled_at": _iso_or_none(p.last_crawled_at),
                "sentence_count": p.sentence_count,
            }
            for p in store.list_platforms()
        ]

    @app.get("/api/platforms/{platform_id}")
    async def handle_status(platform_id: str):
        platform = store.get_platform(platform_id)
        if platform is None:
            return {"platform_id": platform_id, "status": "unindexed",
                    "last_crawled_at": None, "source_urls": [], "sentence_count": 0}
        return {
            "platform_id": platform.platform_id,
            "status": platform.status,
            "last_crawled_at": _iso_or_none(platform.last_crawled_at),
            "source_urls": platform.source_urls,
            "sentence_count": platform.sentence_count,
            "failure_reason": platform.failure_reason,
        }

    @app.post("/api/crawl", status_code=202)
    async def handle_submit(req: SubmitRequest):
        try:
            platform_id = derive_platform_id(req.url)
            store.register_platform(platform_id, req.display_name or platform_id, req.url,
                                    recrawl_interval=timedelta(
                                        days=config.recrawl_interval_days))
            entry = store.enqueue_crawl(platform_id, req.url, "user_submission")
        except InvalidUrl as exc:
            return _error(422, "invalid_url", str(exc))
        return JSONResponse(status_code=202,
                            content={"platform_id": platform_id, "entry_id": entry.entry_id})

    @app.get("/api/queue")
    async def handle_queue():
        return [e.to_dict() for e in store.pending_entries()]

    @app.get("/api/metrics")
    async def handle_metrics():
        return app.state.metrics.summary()

    return app


def _iso_or_none(dt) -> Optional[str]:
    return dt.astimezone(timezone.utc).isoformat() if dt else None


def serve(config: Optional[AppConfig] = None) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    config = config or AppConfig.from_env()
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")

"""On-disk persistence for platforms, documents, embeddings, and the queue.

Layout under the data directory:

    platforms/<platform_id>/platform.json    metadata + document header
    platforms/<platform_id>/document.md      merged Markdown (UTF-8)
    platforms/<platform_id>/sentences.jsonl  one {"id", "text"} object per line
    platforms/<platform_id>/embeddings.bin   binary float32 matrix, see below
    queue.json                               FIFO crawl queue

embeddings.bin: magic "TOSE", u32 version, u32 dim, u64 count, then
count*dim float32 values row-major, everything little-endian.

Writes go to a temp directory first and swap in with rename, so readers see
either the old or the new complete document. One process writes (the
worker); readers retry briefly if a swap happens mid-read.
"""
from __future__ import annotations

import json
import logging
import os
import shutil
import struct
import threading
import time
import uuid
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import List, Optional, Sequence
from urllib.parse import urlsplit

import numpy as np

from .crawler import content_hash
from .embedding import EmbeddingBackendSpec
from .errors import InvalidUrl, StorageFailure
from .text import segment_sentences

logger = logging.getLogger(__name__)

EMBEDDINGS_MAGIC = b"TOSE"
EMBEDDINGS_VERSION = 1
_HEADER = struct.Struct("<4sIIQ")

DEFAULT_RECRAWL_INTERVAL = timedelta(days=7)

STATUSES = ("unindexed", "queued", "crawling", "indexed", "failed")


@dataclass
class Sentence:
    sentence_id: int
    text: str
    embedding: np.ndarray


@dataclass
class TosDocument:
    platform_id: str
    merged_markdown: str
    source_urls: List[str]
    sentences: List[Sentence]
    content_hash: str
    backend_spec: EmbeddingBackendSpec
    fetched_at: datetime


@dataclass
class Platform:
    platform_id: str
    display_name: str
    seed_url: str
    status: str = "unindexed"
    last_crawled_at: Optional[datetime] = None
    recrawl_interval: timedelta = DEFAULT_RECRAWL_INTERVAL
    failure_reason: Optional[str] = None
    document_meta: Optional[dict] = None

    @property
    def sentence_count(self) -> int:
        return int(self.document_meta["sentence_count"]) if self.document_meta else 0

    @property
    def source_urls(self) -> List[str]:
        return list(self.document_meta["source_urls"]) if self.document_meta else []


@dataclass
class CrawlQueueEntry:
    entry_id: int
    platform_id: str
    seed_url: str
    enqueued_at: datetime
    source: str  # user_submission | recrawl_scheduler

    def to_dict(self) -> dict:
        return {
            "entry_id": self.entry_id,
            "platform_id": self.platform_id,
            "seed_url": self.seed_url,
            "enqueued_at": _iso(self.enqueued_at),
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CrawlQueueEntry":
        return cls(
            entry_id=int(d["entry_id"]),
            platform_id=d["platform_id"],
            seed_url=d["seed_url"],
            enqueued_at=_parse_iso(d["enqueued_at"]),
            source=d["source"],
        )


def _iso(dt: Optional[datetime]) -> Optional[str]:
    return dt.astimezone(timezone.utc).isoformat() if dt else None


def _parse_iso(s: Optional[str]) -> Optional[datetime]:
    return datetime.fromisoformat(s) if s else None


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)


def validate_absolute_url(url: str) -> str:
    parts = urlsplit(url)
    if parts.scheme not in ("http", "https") or not parts.netloc:
        raise InvalidUrl(f"not an absolute http(s) URL: {url!r}")
    return url


def write_embeddings(path: str, matrix: np.ndarray) -> None:
    """Write a float32 embedding matrix in the TOSE container format."""
    matrix = np.ascontiguousarray(matrix, dtype="<f4")
    count, dim = matrix.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(EMBEDDINGS_MAGIC, EMBEDDINGS_VERSION, dim, count))
        fh.write(matrix.tobytes())


def read_embeddings(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) != _HEADER.size:
            raise StorageFailure(f"truncated embeddings header in {path}")
        magic, version, dim, count = _HEADER.unpack(header)
        if magic != EMBEDDINGS_MAGIC:
            raise StorageFailure(f"bad magic {magic!r} in {path}")
        if version != EMBEDDINGS_VERSION:
            raise StorageFailure(f"unsupported embeddings version {version}")
        data = fh.read(count * dim * 4)
    if len(data) != count * dim * 4:
        raise StorageFailure(f"truncated embeddings body in {path}")
    return np.frombuffer(data, dtype="<f4").reshape(count, dim)


def build_document(platform_id: str, merged_markdown: str, source_urls: Sequence[str],
                   backend, fetched_at: Optional[datetime] = None) -> TosDocument:
    """Segment and embed merged Markdown into a TosDocument."""
    texts = segment_sentences(merged_markdown)
    matrix = backend.embed_many(texts)
    sentences = [Sentence(i, t, matrix[i]) for i, t in enumerate(texts)]
    return TosDocument(
        platform_id=platform_id,
        merged_markdown=merged_markdown,
        source_urls=list(source_urls),
        sentences=sentences,
        content_hash=content_hash(merged_markdown),
        backend_spec=backend.spec,
        fetched_at=fetched_at or _utcnow(),
    )


class TosStore:
    """Single-writer/multi-reader file store with an embedded crawl queue."""

    def __init__(self, data_dir: str):
        self.data_dir = os.path.abspath(data_dir)
        self.platforms_dir = os.path.join(self.data_dir, "platforms")
        self.queue_path = os.path.join(self.data_dir, "queue.json")
        self._tmp_dir = os.path.join(self.data_dir, ".tmp")
        os.makedirs(self.platforms_dir, exist_ok=True)
        os.makedirs(self._tmp_dir, exist_ok=True)
        self._lock = threading.RLock()

    # --- platforms -----------------------------------------------------

    def _platform_dir(self, platform_id: str) -> str:
        return os.path.join(self.platforms_dir, platform_id)

    def _platform_json(self, platform_id: str) -> str:
        return os.path.join(self._platform_dir(platform_id), "platform.json")

    def register_platform(self, platform_id: str, display_name: str, seed_url: str,
                          recrawl_interval: timedelta = DEFAULT_RECRAWL_INTERVAL) -> Platform:
        validate_absolute_url(seed_url)
        with self._lock:
            existing = self.get_platform(platform_id)
            if existing is not None:
                return existing
            platform = Platform(platform_id=platform_id, display_name=display_name,
                                seed_url=seed_url, recrawl_interval=recrawl_interval)
            self._write_platform(platform)
            return platform

    def get_platform(self, platform_id: str) -> Optional[Platform]:
        # One short retry: a whole-directory swap makes the file vanish for
        # an instant, which is indistinguishable from an unknown platform.
        raw = self._read_json(self._platform_json(platform_id), retries=1, delay=0.005)
        return self._platform_from_dict(raw) if raw is not None else None

    def list_platforms(self) -> List[Platform]:
        out = []
        try:
            names = sorted(os.listdir(self.platforms_dir))
        except FileNotFoundError:
            return out
        for name in names:
            platform = self.get_platform(name)
            if platform is not None:
                out.append(platform)
        return out

    def set_status(self, platform_id: str, status: str,
                   failure_reason: Optional[str] = None) -> None:
        if status not in STATUSES:
            raise ValueError(f"unknown status: {status!r}")
        with self._lock:
            platform = self.get_platform(platform_id)
            if platform is None:
                raise StorageFailure(f"unknown platform: {platform_id}")
            platform.status = status
            platform.failure_reason = failure_reason
            self._write_platform(platform)

    def _platform_from_dict(self, d: dict) -> Platform:
        return Platform(
            platform_id=d["platform_id"],
            display_name=d.get("display_name", d["platform_id"]),
            seed_url=d.get("seed_url", ""),
            status=d.get("status", "unindexed"),
            last_crawled_at=_parse_iso(d.get("last_crawled_at")),
            recrawl_interval=timedelta(days=float(d.get("recrawl_interval_days", 7.0))),
            failure_reason=d.get("failure_reason"),
            document_meta=d.get("document"),
        )

    def _platform_to_dict(self, p: Platform) -> dict:
        return {
            "platform_id": p.platform_id,
            "display_name": p.display_name,
            "seed_url": p.seed_url,
            "status": p.status,
            "last_crawled_at": _iso(p.last_crawled_at),
            "recrawl_interval_days": p.recrawl_interval.total_seconds() / 86400.0,
            "failure_reason": p.failure_reason,
            "document": p.document_meta,
        }

    def _write_platform(self, platform: Platform) -> None:
        pdir = self._platform_dir(platform.platform_id)
        os.makedirs(pdir, exist_ok=True)
        self._atomic_write_json(self._platform_json(platform.platform_id),
                                self._platform_to_dict(platform))

    # --- documents -----------------------------------------------------

    def upsert_document(self, doc: TosDocument) -> None:
        """Atomically replace the stored document for doc.platform_id."""
        with self._lock:
            platform = self.get_platform(doc.platform_id)
            if platform is None:
                platform = Platform(platform_id=doc.platform_id,
                                    display_name=doc.platform_id,
                                    seed_url=doc.source_urls[0] if doc.source_urls else "")
            platform.status = "indexed"
            platform.last_crawled_at = doc.fetched_at
            platform.failure_reason = None
            platform.document_meta = {
                "content_hash": doc.content_hash,
                "source_urls": doc.source_urls,
                "fetched_at": _iso(doc.fetched_at),
                "backend": doc.backend_spec.to_dict(),
                "sentence_count": len(doc.sentences),
            }
            staging = os.path.join(self._tmp_dir, f"{doc.platform_id}.{uuid.uuid4().hex}")
            os.makedirs(staging)
            try:
                with open(os.path.join(staging, "document.md"), "w", encoding="utf-8") as fh:
                    fh.write(doc.merged_markdown)
                with open(os.path.join(staging, "sentences.jsonl"), "w", encoding="utf-8") as fh:
                    for s in doc.sentences:
                        fh.write(json.dumps({"id": s.sentence_id, "text": s.text},
                                            ensure_ascii=False) + "\n")
                if doc.sentences:
                    matrix = np.vstack([s.embedding for s in doc.sentences])
                else:
                    matrix = np.zeros((0, doc.backend_spec.dim))
                write_embeddings(os.path.join(staging, "embeddings.bin"), matrix)
                with open(os.path.join(staging, "platform.json"), "w", encoding="utf-8") as fh:
                    json.dump(self._platform_to_dict(platform), fh, indent=2)
                self._swap_in(staging, self._platform_dir(doc.platform_id))
            except OSError as exc:
                shutil.rmtree(staging, ignore_errors=True)
                raise StorageFailure(f"failed to store document: {exc}") from exc

    def encode_and_store(self, platform_id: str, merged_markdown: str,
                         source_urls: Sequence[str], backend,
                         fetched_at: Optional[datetime] = None) -> TosDocument:
        """Segment, embed, and persist; skips re-encoding when content is unchanged.

        When the merged Markdown hashes to the stored document's hash, the
        existing sentence embeddings are reused and the backend is never
        called; only the crawl timestamp advances.
        """
        new_hash = content_hash(merged_markdown)
        fetched_at = fetched_at or _utcnow()
        with self._lock:
            platform = self.get_platform(platform_id)
            if (platform is not None and platform.document_meta
                    and platform.document_meta.get("content_hash") == new_hash):
                platform.status = "indexed"
                platform.last_crawled_at = fetched_at
                platform.failure_reason = None
                platform.document_meta["fetched_at"] = _iso(fetched_at)
                self._write_platform(platform)
                logger.info("content unchanged for %s, reusing stored embeddings", platform_id)
                return self.load_document(platform_id)
            doc = build_document(platform_id, merged_markdown, source_urls, backend, fetched_at)
            self.upsert_document(doc)
            return doc

    def load_document(self, platform_id: str) -> Optional[TosDocument]:
        # Optimistic read: load metadata, then the files, then metadata again.
        # A directory swap between the two metadata reads (or a hash mismatch)
        # means the read straddled an upsert, so try again.
        for attempt in range(6):
            platform = self.get_platform(platform_id)
            if platform is None or not platform.document_meta:
                return None
            meta = platform.document_meta
            pdir = self._platform_dir(platform_id)
            try:
                with open(os.path.join(pdir, "document.md"), encoding="utf-8") as fh:
                    markdown = fh.read()
                rows = []
                with open(os.path.join(pdir, "sentences.jsonl"), encoding="utf-8") as fh:
                    for line in fh:
                        if line.strip():
                            rows.append(json.loads(line))
                matrix = read_embeddings(os.path.join(pdir, "embeddings.bin"))
            except FileNotFoundError:
                time.sleep(0.01 * (attempt + 1))  # mid-swap; retry
                continue
            check = self.get_platform(platform_id)
            consistent = (
                check is not None
                and check.document_meta is not None
                and check.document_meta.get("content_hash") == meta["content_hash"]
                and content_hash(markdown) == meta["content_hash"]
                and len(rows) == matrix.shape[0]
            )
            if not consistent:
                time.sleep(0.01 * (attempt + 1))
                continue
            sentences = [Sentence(int(r["id"]), r["text"], matrix[i])
                         for i, r in enumerate(rows)]
            return TosDocument(
                platform_id=platform_id,
                merged_markdown=markdown,
                source_urls=list(meta.get("source_urls", [])),
                sentences=sentences,
                content_hash=meta["content_hash"],
                backend_spec=EmbeddingBackendSpec.from_dict(meta["backend"]),
                fetched_at=_parse_iso(meta.get("fetched_at")) or _utcnow(),
            )
        raise StorageFailure(f"document for {platform_id} kept changing mid-read")

    # --- crawl queue ----------------------------------------------------

    def _read_queue(self) -> dict:
        raw = self._read_json(self.queue_path)
        return raw if raw is not None else {"next_entry_id": 1, "entries": []}

    def _write_queue(self, state: dict) -> None:
        self._atomic_write_json(self.queue_path, state)

    def enqueue_crawl(self, platform_id: str, seed_url: str, source: str) -> CrawlQueueEntry:
        """Append a FIFO entry; duplicate pending entries coalesce."""
        validate_absolute_url(seed_url)
        if source not in ("user_submission", "recrawl_scheduler"):
            raise ValueError(f"unknown queue source: {source!r}")
        with self._lock:
            state = self._read_queue()
            for entry_dict in state["entries"]:
                if entry_dict["platform_id"] == platform_id:
                    return CrawlQueueEntry.from_dict(entry_dict)
            entry = CrawlQueueEntry(
                entry_id=state["next_entry_id"],
                platform_id=platform_id,
                seed_url=seed_url,
                enqueued_at=_utcnow(),
                source=source,
            )
            state["next_entry_id"] += 1
            state["entries"].append(entry.to_dict())
            self._write_queue(state)
            platform = self.get_platform(platform_id)
            if platform is None:
                self.register_platform(platform_id, platform_id, seed_url)
                self.set_status(platform_id, "queued")
            elif platform.status in ("unindexed", "failed"):
                self.set_status(platform_id, "queued")
            return entry

    def pending_entries(self) -> List[CrawlQueueEntry]:
        state = self._read_queue()
        return [CrawlQueueEntry.from_dict(d) for d in state["entries"]]

    def dequeue(self) -> Optional[CrawlQueueEntry]:
        with self._lock:
            state = self._read_queue()
            if not state["entries"]:
                return None
            entry_dict = state["entries"].pop(0)
            self._write_queue(state)
            return CrawlQueueEntry.from_dict(entry_dict)

    def schedule_recrawls(self, now: Optional[datetime] = None) -> List[CrawlQueueEntry]:
        """Enqueue overdue indexed platforms. Idempotent within one tick."""
        now = now or _utcnow()
        created: List[CrawlQueueEntry] = []
        with self._lock:
            pending = {e.platform_id for e in self.pending_entries()}
            for platform in self.list_platforms():
                if platform.status != "indexed" or platform.platform_id in pending:
                    continue
                if platform.last_crawled_at is None:
                    continue
                if now - platform.last_crawled_at >= platform.recrawl_interval:
                    created.append(self.enqueue_crawl(
                        platform.platform_id, platform.seed_url, "recrawl_scheduler"))
        return created

    # --- low-level helpers ----------------------------------------------

    def _atomic_write_json(self, path: str, payload: dict) -> None:
        tmp = os.path.join(self._tmp_dir, f"{os.path.basename(path)}.{uuid.uuid4().hex}")
        try:
            with open(tmp, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=2)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except OSError as exc:
            raise StorageFailure(f"failed to write {path}: {exc}") from exc

    def _read_json(self, path: str, retries: int = 0, delay: float = 0.01) -> Optional[dict]:
        for attempt in range(retries + 1):
            try:
                with open(path, encoding="utf-8") as fh:
                    return json.load(fh)
            except FileNotFoundError:
                if attempt < retries:
                    time.sleep(delay)
            except json.JSONDecodeError as exc:
                raise StorageFailure(f"corrupt JSON in {path}: {exc}") from exc
        return None

    def _swap_in(self, staging: str, target: str) -> None:
        trash = None
        if os.path.exists(target):
            trash = os.path.join(self._tmp_dir, f"old.{uuid.uuid4().hex}")
            os.rename(target, trash)
        try:
            os.rename(staging, target)
        except OSError:
            if trash is not None:
                os.rename(trash, target)  # roll back
            raise
        if trash is not None:
            shutil.rmtree(trash, ignore_errors=True)

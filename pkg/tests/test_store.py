import json
import os
import struct
import threading
from datetime import datetime, timedelta, timezone

import numpy as np
import pytest

from tosqa.embedding import ReferenceHashBackend
from tosqa.errors import InvalidUrl, StorageFailure
from tosqa.store import (
    CrawlQueueEntry,
    TosStore,
    build_document,
    read_embeddings,
    write_embeddings,
)

MD = """# https://ex.com/terms

You agree to the terms of this service. We collect email addresses from
every registered user. You may cancel your subscription at any time. The
provider may update these terms with thirty days notice to you.
"""


@pytest.fixture
def store(tmp_path):
    return TosStore(str(tmp_path / "data"))


@pytest.fixture
def small_backend():
    return ReferenceHashBackend(seed=42, dim=32)


def make_doc(backend, platform_id="example", markdown=MD):
    return build_document(platform_id, markdown, ["https://ex.com/terms"], backend)


# --- embeddings.bin format ----------------------------------------------------

def test_embeddings_header_layout(tmp_path):
    path = str(tmp_path / "e.bin")
    matrix = np.arange(12, dtype=np.float32).reshape(3, 4)
    write_embeddings(path, matrix)
    raw = open(path, "rb").read()
    magic, version, dim, count = struct.unpack("<4sIIQ", raw[:20])
    assert magic == b"TOSE"
    assert version == 1
    assert dim == 4
    assert count == 3
    assert raw[20:] == matrix.astype("<f4").tobytes()
    assert np.array_equal(read_embeddings(path), matrix)


def test_embeddings_reject_bad_magic(tmp_path):
    path = str(tmp_path / "bad.bin")
    with open(path, "wb") as fh:
        fh.write(b"NOPE" + b"\x00" * 16)
    with pytest.raises(StorageFailure):
        read_embeddings(path)


def test_embeddings_reject_truncation(tmp_path):
    path = str(tmp_path / "trunc.bin")
    write_embeddings(path, np.ones((4, 3), dtype=np.float32))
    raw = open(path, "rb").read()
    with open(path, "wb") as fh:
        fh.write(raw[:-5])
    with pytest.raises(StorageFailure):
        read_embeddings(path)


# --- documents -----------------------------------------------------------------

def test_document_roundtrip(store, small_backend):
    doc = make_doc(small_backend)
    store.upsert_document(doc)
    loaded = store.load_document("example")
    assert loaded.merged_markdown == MD
    assert loaded.content_hash == doc.content_hash
    assert [s.text for s in loaded.sentences] == [s.text for s in doc.sentences]
    want = np.vstack([s.embedding for s in doc.sentences]).astype(np.float32)
    got = np.vstack([s.embedding for s in loaded.sentences])
    assert np.array_equal(got, want)
    platform = store.get_platform("example")
    assert platform.status == "indexed"
    assert platform.last_crawled_at is not None
    assert platform.sentence_count == len(doc.sentences)


def test_document_files_exist_as_specified(store, small_backend):
    store.upsert_document(make_doc(small_backend))
    pdir = os.path.join(store.platforms_dir, "example")
    for name in ("platform.json", "document.md", "sentences.jsonl", "embeddings.bin"):
        assert os.path.exists(os.path.join(pdir, name)), name
    lines = open(os.path.join(pdir, "sentences.jsonl"), encoding="utf-8").read().splitlines()
    rows = [json.loads(line) for line in lines]
    assert rows[0]["id"] == 0
    assert all(set(r) == {"id", "text"} for r in rows)


def test_reload_after_new_store_instance(store, small_backend, tmp_path):
    doc = make_doc(small_backend)
    store.upsert_document(doc)
    reopened = TosStore(store.data_dir)  # same directory, fresh process state
    loaded = reopened.load_document("example")
    assert loaded.merged_markdown == MD
    assert loaded.backend_spec == small_backend.spec


def test_encode_and_store_short_circuits_on_same_hash(store, small_backend):
    store.encode_and_store("netflix", MD, ["https://ex.com/terms"], small_backend)
    calls_after_first = small_backend.embed_calls
    assert calls_after_first > 0
    doc = store.encode_and_store("netflix", MD, ["https://ex.com/terms"], small_backend)
    assert small_backend.embed_calls == calls_after_first  # zero new embeddings
    assert doc.merged_markdown == MD
    changed = MD + "\nAdditional clause about something new entirely.\n"
    store.encode_and_store("netflix", changed, ["https://ex.com/terms"], small_backend)
    assert small_backend.embed_calls > calls_after_first


def test_concurrent_reader_sees_old_or_new_never_mix(store, small_backend):
    doc_a = make_doc(small_backend, markdown=MD)
    alt = MD.replace("thirty days", "sixty days")
    doc_b = make_doc(small_backend, markdown=alt)
    store.upsert_document(doc_a)
    hashes = {doc_a.content_hash: MD, doc_b.content_hash: alt}

    stop = threading.Event()
    failures = []

    def reader():
        while not stop.is_set():
            loaded = store.load_document("example")
            if loaded is None:
                failures.append("document vanished")
                break
            if hashes.get(loaded.content_hash) != loaded.merged_markdown:
                failures.append("hash/content mix")
                break

    thread = threading.Thread(target=reader)
    thread.start()
    for i in range(30):
        store.upsert_document(doc_b if i % 2 == 0 else doc_a)
    stop.set()
    thread.join(timeout=5)
    assert not failures


def test_upsert_registers_platform_when_missing(store, small_backend):
    store.upsert_document(make_doc(small_backend, platform_id="fresh"))
    platform = store.get_platform("fresh")
    assert platform is not None
    assert platform.status == "indexed"


# --- queue -----------------------------------------------------------------------

def test_enqueue_fifo_order(store):
    a = store.enqueue_crawl("apple", "https://apple.example/legal", "user_submission")
    b = store.enqueue_crawl("google", "https://google.example/terms", "user_submission")
    assert a.entry_id < b.entry_id
    assert store.dequeue().platform_id == "apple"
    assert store.dequeue().platform_id == "google"
    assert store.dequeue() is None


def test_enqueue_coalesces_duplicates(store):
    first = store.enqueue_crawl("apple", "https://apple.example/legal", "user_submission")
    second = store.enqueue_crawl("apple", "https://apple.example/legal", "user_submission")
    assert first.entry_id == second.entry_id
    assert len(store.pending_entries()) == 1


def test_enqueue_sets_queued_status(store):
    store.enqueue_crawl("apple", "https://apple.example/legal", "user_submission")
    assert store.get_platform("apple").status == "queued"


def test_enqueue_invalid_url(store):
    with pytest.raises(InvalidUrl):
        store.enqueue_crawl("bad", "not-a-url", "user_submission")


def test_enqueue_keeps_indexed_status(store, small_backend):
    store.upsert_document(make_doc(small_backend, platform_id="apple"))
    store.enqueue_crawl("apple", "https://apple.example/legal", "recrawl_scheduler")
    assert store.get_platform("apple").status == "indexed"


def test_queue_survives_restart(store):
    store.enqueue_crawl("apple", "https://apple.example/legal", "user_submission")
    reopened = TosStore(store.data_dir)
    assert [e.platform_id for e in reopened.pending_entries()] == ["apple"]


def test_entry_roundtrip_dict():
    entry = CrawlQueueEntry(entry_id=7, platform_id="x", seed_url="https://x.example",
                            enqueued_at=datetime.now(timezone.utc), source="user_submission")
    assert CrawlQueueEntry.from_dict(entry.to_dict()) == entry


# --- recrawl scheduling -------------------------------------------------------------

def _index_platform(store, backend, platform_id, crawled_ago: timedelta):
    doc = make_doc(backend, platform_id=platform_id)
    doc.fetched_at = datetime.now(timezone.utc) - crawled_ago
    store.upsert_document(doc)


def test_schedule_recrawls_overdue(store, small_backend):
    _index_platform(store, small_backend, "stale", timedelta(days=8))
    created = store.schedule_recrawls()
    assert [e.platform_id for e in created] == ["stale"]
    assert created[0].source == "recrawl_scheduler"


def test_schedule_recrawls_fresh_untouched(store, small_backend):
    _index_platform(store, small_backend, "fresh", timedelta(hours=1))
    assert store.schedule_recrawls() == []


def test_schedule_recrawls_no_duplicate_when_pending(store, small_backend):
    _index_platform(store, small_backend, "stale", timedelta(days=8))
    first = store.schedule_recrawls()
    assert len(first) == 1
    assert store.schedule_recrawls() == []  # idempotent within a tick
    assert len(store.pending_entries()) == 1


def test_set_status_transitions(store):
    store.register_platform("p", "P", "https://p.example/")
    store.set_status("p", "queued")
    store.set_status("p", "crawling")
    store.set_status("p", "failed", failure_reason="boom")
    platform = store.get_platform("p")
    assert platform.status == "failed"
    assert platform.failure_reason == "boom"
    with pytest.raises(ValueError):
        store.set_status("p", "sideways")


def test_unknown_platform_returns_none(store):
    assert store.get_platform("nope") is None
    assert store.load_document("nope") is None

"""Crawl a multi-page ToS site and index it.

Starts a local demo site, walks it with the keyword-guided crawler, merges
the kept pages into one Markdown document, and stores sentence embeddings
on disk. Run it directly:

    python demos/01_crawl_and_index.py
"""
import sys
import tempfile

sys.path.insert(0, "demos")
from _fixture_site import start_demo_site

from tosqa.crawler import CrawlConfig, crawl_site, merge_pages
from tosqa.embedding import ReferenceHashBackend
from tosqa.store import TosStore

base_url, stop = start_demo_site()
print(f"demo site listening at {base_url}\n")

config = CrawlConfig(seed_url=base_url + "/", politeness_delay_ms=50)
pages = crawl_site(config)

print("crawl log:")
for page in pages:
    verdict = "kept" if page.kept else f"skipped ({page.skipped_reason})"
    print(f"  depth {page.depth}  {page.url:<40} {verdict}")

merged, source_urls = merge_pages(pages)
print(f"\nmerged document: {len(merged)} characters from {len(source_urls)} pages")

data_dir = tempfile.mkdtemp(prefix="tosqa-demo-")
store = TosStore(data_dir)
backend = ReferenceHashBackend(seed=42, dim=384)
doc = store.encode_and_store("demo-platform", merged, source_urls, backend)
print(f"indexed {len(doc.sentences)} sentences into {data_dir}")
print(f"content hash: {doc.content_hash[:16]}...")

print("\nfirst statements:")
for sentence in doc.sentences[:5]:
    print(f"  [{sentence.sentence_id}] {sentence.text}")

# Re-crawling unchanged content never re-encodes: the hash short-circuits.
calls_before = backend.embed_calls
store.encode_and_store("demo-platform", merged, source_urls, backend)
print(f"\nre-store with identical content: {backend.embed_calls - calls_before} "
      f"new embedding calls (cache hit)")

stop()

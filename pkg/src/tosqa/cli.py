"""Operator command line: crawl, query, qep, serve, bench, list.

Exit codes are part of the contract so CI can script against them:
    crawl: 0 ok, 1 no content, 2 seed unreachable
    query: 0 accepted, 3 gated by the relevance threshold, 4 platform missing
    qep/bench: 0 ok, 1 component failure
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from datetime import timedelta
from typing import List, Optional

import numpy as np

from .config import AppConfig
from .crawler import CrawlConfig, crawl_site, merge_pages
from .embedding import make_backend
from .errors import NoContent, SeedUnreachable, TosQaError
from .kmeans import fit_kmeans
from .qa import DocumentIndex, QaConfig, answer_query, answer_query_timed
from .qep import (
    format_accuracy_table,
    make_identity_qa,
    make_random_qa,
    run_qep,
)
from .service import derive_platform_id
from .store import TosStore, build_document

logger = logging.getLogger(__name__)


def _load_config(args) -> AppConfig:
    cfg = AppConfig.from_env(getattr(args, "config", None))
    if getattr(args, "data_dir", None):
        cfg.data_dir = args.data_dir
    return cfg


def cmd_crawl(args) -> int:
    cfg = _load_config(args)
    store = TosStore(cfg.data_dir)
    backend = make_backend(cfg.backend)
    platform_id = args.platform_id or derive_platform_id(args.url)
    crawl_cfg = CrawlConfig(
        seed_url=args.url,
        max_depth=args.max_depth if args.max_depth is not None else cfg.crawl_max_depth,
        max_pages=args.max_pages if args.max_pages is not None else cfg.crawl_max_pages,
        politeness_delay_ms=cfg.politeness_delay_ms,
        honor_robots=cfg.honor_robots,
        language_filter=cfg.language_filter,
    )
    try:
        pages = crawl_site(crawl_cfg)
        merged, source_urls = merge_pages(pages)
    except SeedUnreachable as exc:
        print(f"error: seed unreachable: {exc}", file=sys.stderr)
        return 2
    except NoContent as exc:
        print(f"error: no content: {exc}", file=sys.stderr)
        return 1
    store.register_platform(platform_id, args.platform_id or platform_id, args.url,
                            recrawl_interval=timedelta(days=cfg.recrawl_interval_days))
    doc = store.encode_and_store(platform_id, merged, source_urls, backend)
    skipped = [p for p in pages if not p.kept]
    print(f"platform: {platform_id}")
    print(f"pages kept: {len(source_urls)}, skipped: {len(skipped)}")
    for page in skipped:
        print(f"  skipped {page.url} ({page.skipped_reason})")
    print(f"sentences: {len(doc.sentences)}")
    return 0


def cmd_query(args) -> int:
    cfg = _load_config(args)
    store = TosStore(cfg.data_dir)
    platform = store.get_platform(args.platform)
    if platform is None or platform.status != "indexed":
        print(f"error: platform {args.platform!r} is not indexed", file=sys.stderr)
        return 4
    doc = store.load_document(args.platform)
    backend = make_backend(doc.backend_spec)
    index = DocumentIndex.from_document(doc, backend=backend)
    qa_cfg = QaConfig(tau=args.tau if args.tau is not None else cfg.tau)
    answer = answer_query(args.question, index, qa_cfg)
    if answer.accepted:
        print(answer.text)
    else:
        print(answer.fallback_message)
        print(f"(best candidate: {answer.text!r})")
    print(f"similarity: {answer.similarity:.4f}  relevance: {answer.relevance:.4f}")
    return 0 if answer.accepted else 3


def _qep_document(args, cfg: AppConfig):
    """Load the evaluation corpus: an indexed platform or a Markdown directory."""
    backend = make_backend(cfg.backend)
    if args.platform:
        store = TosStore(cfg.data_dir)
        doc = store.load_document(args.platform)
        if doc is None:
            raise TosQaError(f"platform {args.platform!r} is not indexed")
        return doc, make_backend(doc.backend_spec)
    import glob
    import os

    paths = sorted(glob.glob(os.path.join(args.corpus_dir, "*.md")))
    if not paths:
        raise TosQaError(f"no .md files under {args.corpus_dir!r}")
    merged = []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            merged.append(fh.read())
    doc = build_document("corpus", "\n\n".join(merged), [f"file://{p}" for p in paths], backend)
    return doc, backend


def _qep_once(doc, backend, k: int, seed: int, oracle: str, tau: float,
              strict_gate: bool):
    vectors = np.vstack([np.asarray(s.embedding, dtype=np.float64) for s in doc.sentences])
    model = fit_kmeans(vectors, k, seed)
    if oracle == "identity":
        qa = make_identity_qa(doc)
    elif oracle == "random":
        qa = make_random_qa(doc, seed=seed)
    else:
        index = DocumentIndex.from_document(doc, backend=backend)
        qa_cfg = QaConfig(tau=tau)

        def qa(question: str):
            return answer_query(question, index, qa_cfg)

    return run_qep(doc, model, qa, count_rejected_as_incorrect=strict_gate)


def cmd_qep(args) -> int:
    cfg = _load_config(args)
    try:
        doc, backend = _qep_document(args, cfg)
        ks = [int(x) for x in args.k_sweep.split(",")] if args.k_sweep else [args.k]
        reports = []
        for k in ks:
            report = _qep_once(doc, backend, k, args.seed, args.oracle,
                               args.tau if args.tau is not None else cfg.tau,
                               args.strict_gate)
            reports.append(report)
    except TosQaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    accs = {r.k: r.accuracy for r in reports}
    print(format_accuracy_table({doc.platform_id: accs}))
    if args.out:
        payload = reports[0].to_dict() if len(reports) == 1 else [r.to_dict() for r in reports]
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2)
        print(f"report written to {args.out}")
    return 0


def cmd_bench(args) -> int:
    cfg = _load_config(args)
    store = TosStore(cfg.data_dir)
    platform = store.get_platform(args.platform)
    if platform is None or platform.status != "indexed":
        print(f"error: platform {args.platform!r} is not indexed", file=sys.stderr)
        return 1
    import psutil

    doc = store.load_document(args.platform)
    backend = make_backend(doc.backend_spec)
    index = DocumentIndex.from_document(doc, backend=backend)
    qa_cfg = QaConfig(tau=args.tau if args.tau is not None else cfg.tau)
    psutil.cpu_percent(None)
    rows = []
    for _ in range(args.repeat):
        t0 = time.perf_counter()
        timed = answer_query_timed(args.question, index, qa_cfg)
        latency_ms = (time.perf_counter() - t0) * 1000.0
        rows.append((latency_ms, psutil.cpu_percent(None),
                     psutil.virtual_memory().percent, timed.timing_ms))
    header = f"{'Run':<5}{'Latency (s)':>12}{'CPU (%)':>9}{'RAM (%)':>9}{'Timing (s)':>12}"
    print(header)
    print("-" * len(header))
    for i, (lat, cpu, ram, tim) in enumerate(rows, 1):
        print(f"{i:<5}{lat / 1000:>12.4f}{cpu:>9.2f}{ram:>9.2f}{tim / 1000:>12.4f}")
    n = len(rows)
    means = [sum(r[i] for r in rows) / n for i in range(4)]
    print(f"{'mean':<5}{means[0] / 1000:>12.4f}{means[1]:>9.2f}{means[2]:>9.2f}{means[3] / 1000:>12.4f}")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("run,latency_ms,cpu_percent,ram_percent,timing_ms\n")
            for i, (lat, cpu, ram, tim) in enumerate(rows, 1):
                fh.write(f"{i},{lat:.4f},{cpu:.2f},{ram:.2f},{tim:.4f}\n")
            fh.write(f"mean,{means[0]:.4f},{means[1]:.2f},{means[2]:.2f},{means[3]:.4f}\n")
        print(f"csv written to {args.csv}")
    return 0


def cmd_list(args) -> int:
    cfg = _load_config(args)
    store = TosStore(cfg.data_dir)
    platforms = store.list_platforms()
    if not platforms:
        print("no platforms")
        return 0
    for p in platforms:
        stamp = p.last_crawled_at.isoformat() if p.last_crawled_at else "-"
        print(f"{p.platform_id:<24} {p.status:<10} sentences={p.sentence_count:<6} last_crawled={stamp}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    cfg = _load_config(args)
    serve(cfg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tosqa", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--config", help="path to the JSON config (defaults to $TOSQA_CONFIG)")
    parser.add_argument("--data-dir", help="override the configured data directory")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("crawl", help="crawl one platform and index it")
    p.add_argument("--url", required=True)
    p.add_argument("--platform-id")
    p.add_argument("--max-depth", type=int)
    p.add_argument("--max-pages", type=int)
    p.set_defaults(func=cmd_crawl)

    p = sub.add_parser("query", help="ask a question against an indexed platform")
    p.add_argument("--platform", required=True)
    p.add_argument("--question", required=True)
    p.add_argument("--tau", type=float)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("qep", help="run the clustering evaluation pipeline")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--platform")
    group.add_argument("--corpus-dir")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--k-sweep", help="comma-separated list of k values, e.g. 5,10,15,20,30,50,80")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tau", type=float)
    p.add_argument("--oracle", choices=["none", "identity", "random"], default="none",
                   help="replace the QA engine with a scoring oracle")
    p.add_argument("--strict-gate", action="store_true",
                   help="count relevance-gated answers as incorrect")
    p.add_argument("--out", help="write the report JSON here")
    p.set_defaults(func=cmd_qep)

    p = sub.add_parser("bench", help="measure per-query latency and resource use")
    p.add_argument("--platform", required=True)
    p.add_argument("--question", required=True)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--tau", type=float)
    p.add_argument("--csv", help="also write rows to this CSV file")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("list", help="list known platforms")
    p.set_defaults(func=cmd_list)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        return args.func(args)
    except TosQaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

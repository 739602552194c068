"""Multi-page ToS crawler: discovery, fetching, cleaning, deduplication.

The crawl is a breadth-first walk from a seed URL. Only links whose anchor
text or URL path mentions a ToS keyword are followed. Each fetched page runs
through the login-redirect gate, the English filter, and readability
cleaning; version duplicates are collapsed afterwards and the surviving
pages merge into one Markdown document in crawl order.

Static HTTP fetch only: JavaScript-rendered pages are a documented
limitation. Requests to a single host are spaced by a politeness delay and
robots.txt disallow rules are honored by default.
"""
from __future__ import annotations

import hashlib
import logging
import re
import time
import urllib.robotparser
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Dict, List, Optional, Sequence, Tuple
from urllib.parse import urljoin, urlsplit, urlunsplit

import requests

from . import __version__ as _pkg_version
from .errors import EmptyContent, NoContent, SeedUnreachable
from .htmldom import parse_html
from .readability import clean_content
from .text import STOPWORDS, tokenize

logger = logging.getLogger(__name__)

DEFAULT_KEYWORDS = ["terms", "privacy", "policy", "legal", "agreement", "eula", "conditions"]
LOGIN_PATH_MARKERS = ("login", "signin", "sign-in", "auth")
ENGLISH_STOPWORD_RATIO = 0.05
ENGLISH_MIN_TOKENS = 20
MAX_REDIRECTS = 5
USER_AGENT = f"tos-qa-engine/{_pkg_version}"

_VERSION_SEGMENT_RE = re.compile(r"^(v\d+|\d{4})$")
_DATEISH_SEGMENT_RE = re.compile(r"^\d{4}")


@dataclass
class CrawlConfig:
    seed_url: str
    max_depth: int = 2
    max_pages: int = 20
    keyword_set: List[str] = field(default_factory=lambda: list(DEFAULT_KEYWORDS))
    same_origin_only: bool = True
    request_timeout: int = 15000  # milliseconds
    language_filter: str = "english_only"
    politeness_delay_ms: int = 250
    honor_robots: bool = True

    def __post_init__(self):
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.max_pages < 1:
            raise ValueError("max_pages must be >= 1")
        if self.request_timeout <= 0:
            raise ValueError("request_timeout must be positive")
        if not self.keyword_set:
            raise ValueError("keyword_set must not be empty")
        if self.language_filter not in ("english_only", "off"):
            raise ValueError(f"unknown language_filter: {self.language_filter!r}")
        self.keyword_set = [k.lower() for k in self.keyword_set]


@dataclass
class CrawledPage:
    url: str
    final_url: str
    depth: int
    raw_html: str = ""
    cleaned_markdown: str = ""
    content_hash: str = ""
    fetched_at: Optional[datetime] = None
    skipped_reason: Optional[str] = None  # login_redirect | non_english | duplicate | fetch_error | empty_content

    @property
    def kept(self) -> bool:
        return self.skipped_reason is None


def content_hash(markdown: str) -> str:
    """SHA-256 hex digest of the cleaned Markdown."""
    return hashlib.sha256(markdown.encode("utf-8")).hexdigest()


def _normalize_url(url: str) -> str:
    parts = urlsplit(url)
    return urlunsplit((parts.scheme, parts.netloc, parts.path, parts.query, ""))


def _origin(url: str) -> Tuple[str, str]:
    parts = urlsplit(url)
    return (parts.scheme.lower(), parts.netloc.lower())


def discover_tos_links(html: str, base_url: str, keywords: Sequence[str]) -> List[str]:
    """Absolute URLs of anchors whose text or path mentions a keyword.

    Matching is case-insensitive substring on the anchor text or on the
    resolved URL path. Fragment-only links and non-http(s) schemes are
    excluded. Output keeps document order of first occurrence, deduplicated.
    """
    root = parse_html(html)
    keywords = [k.lower() for k in keywords]
    seen = set()
    found: List[str] = []
    for anchor in root.find_all("a"):
        href = (anchor.attrs.get("href") or "").strip()
        if not href or href.startswith("#"):
            continue
        resolved = urljoin(base_url, href)
        parts = urlsplit(resolved)
        if parts.scheme not in ("http", "https"):
            continue
        text = anchor.get_text().lower()
        path = parts.path.lower()
        if not any(k in text or k in path for k in keywords):
            continue
        normalized = _normalize_url(resolved)
        if normalized not in seen:
            seen.add(normalized)
            found.append(normalized)
    return found


def detect_login_redirect(page: CrawledPage) -> bool:
    """True when the page landed on a login flow.

    Checks the final URL path for login markers and the HTML for a
    password-type input element.
    """
    path = urlsplit(page.final_url).path.lower()
    if any(marker in path for marker in LOGIN_PATH_MARKERS):
        return True
    if page.raw_html:
        root = parse_html(page.raw_html)
        for node in root.find_all("input"):
            if (node.attrs.get("type") or "").lower() == "password":
                return True
    return False


def detect_language_english(text: str) -> bool:
    """Stopword-ratio English detector.

    True iff at least 20 tokens and at least 5% of them belong to the
    built-in English stopword list.
    """
    tokens = tokenize(text)
    if len(tokens) < ENGLISH_MIN_TOKENS:
        return False
    hits = sum(1 for t in tokens if t in STOPWORDS)
    return hits / len(tokens) >= ENGLISH_STOPWORD_RATIO


def _path_segments(url: str) -> List[str]:
    return [seg for seg in urlsplit(url).path.split("/") if seg]


def _is_version_marker(segment: str) -> bool:
    s = segment.lower()
    return bool(_VERSION_SEGMENT_RE.match(s)) or "archive" in s or "previous" in s


def dedupe_versions(pages: List[CrawledPage]) -> List[CrawledPage]:
    """Collapse content-identical pages and older URL versions.

    Pages sharing a content hash keep the first-crawled instance. Pages whose
    URLs differ only by version/date path segments (``v<digits>``, a 4-digit
    year, or a segment containing "archive"/"previous") keep the unmarked
    candidate, or the one with the lexicographically greatest date-like
    segment when every candidate is marked. Losers get
    skipped_reason="duplicate". The input list is returned for chaining.
    """
    seen_hashes: Dict[str, CrawledPage] = {}
    for page in pages:
        if not page.kept:
            continue
        prior = seen_hashes.get(page.content_hash)
        if prior is not None:
            page.skipped_reason = "duplicate"
        else:
            seen_hashes[page.content_hash] = page

    groups: Dict[Tuple, List[CrawledPage]] = {}
    for page in pages:
        if not page.kept:
            continue
        segments = _path_segments(page.final_url)
        key = (_origin(page.final_url), tuple(s for s in segments if not _is_version_marker(s)))
        groups.setdefault(key, []).append(page)

    for group in groups.values():
        if len(group) < 2:
            continue
        unmarked = [p for p in group if not any(_is_version_marker(s) for s in _path_segments(p.final_url))]
        if unmarked:
            winner = unmarked[0]
        else:
            def date_key(p: CrawledPage) -> str:
                marks = [s for s in _path_segments(p.final_url) if _is_version_marker(s)]
                dateish = [s for s in marks if _DATEISH_SEGMENT_RE.match(s)]
                return max(dateish) if dateish else max(marks)
            winner = max(group, key=date_key)
        for page in group:
            if page is not winner:
                page.skipped_reason = "duplicate"
    return pages


class HttpFetcher:
    """requests-based fetcher with politeness delays and robots.txt support."""

    def __init__(self, timeout_ms: int = 15000, politeness_delay_ms: int = 250,
                 honor_robots: bool = True, session: Optional[requests.Session] = None):
        self.timeout = timeout_ms / 1000.0
        self.politeness_delay = politeness_delay_ms / 1000.0
        self.honor_robots = honor_robots
        self.session = session or requests.Session()
        self.session.max_redirects = MAX_REDIRECTS
        self.session.headers["User-Agent"] = USER_AGENT
        self._last_request: Dict[str, float] = {}
        self._robots: Dict[Tuple[str, str], urllib.robotparser.RobotFileParser] = {}

    def _wait_politely(self, host: str) -> None:
        last = self._last_request.get(host)
        if last is not None:
            remaining = self.politeness_delay - (time.monotonic() - last)
            if remaining > 0:
                time.sleep(remaining)
        self._last_request[host] = time.monotonic()

    def allowed_by_robots(self, url: str) -> bool:
        if not self.honor_robots:
            return True
        origin = _origin(url)
        parser = self._robots.get(origin)
        if parser is None:
            parser = urllib.robotparser.RobotFileParser()
            robots_url = f"{origin[0]}://{origin[1]}/robots.txt"
            try:
                self._wait_politely(origin[1])
                resp = self.session.get(robots_url, timeout=self.timeout)
                if resp.status_code == 200:
                    parser.parse(resp.text.splitlines())
                else:
                    parser.allow_all = True
            except requests.RequestException:
                parser.allow_all = True
            self._robots[origin] = parser
        return parser.can_fetch(USER_AGENT, url)

    def fetch(self, url: str) -> Tuple[str, str]:
        """GET a page. Returns (final_url, html_text)."""
        self._wait_politely(_origin(url)[1])
        resp = self.session.get(url, timeout=self.timeout, allow_redirects=True)
        resp.raise_for_status()
        return str(resp.url), resp.text


def _gate_page(page: CrawledPage, config: CrawlConfig) -> None:
    """Apply login/cleaning/language gates, setting skipped_reason in place."""
    if detect_login_redirect(page):
        page.skipped_reason = "login_redirect"
        return
    try:
        page.cleaned_markdown = clean_content(page.raw_html)
    except EmptyContent:
        page.skipped_reason = "empty_content"
        return
    page.content_hash = content_hash(page.cleaned_markdown)
    if config.language_filter == "english_only":
        if not detect_language_english(page.cleaned_markdown):
            page.skipped_reason = "non_english"


def crawl_site(config: CrawlConfig, fetcher: Optional[HttpFetcher] = None) -> List[CrawledPage]:
    """Breadth-first crawl. Returns every fetched page, kept or skipped.

    Links are discovered from the seed page regardless of its gate outcome
    (the seed is operator-supplied) and from kept pages otherwise. The fetch
    budget counts every page request; robots.txt lookups are not pages.
    """
    fetcher = fetcher or HttpFetcher(
        timeout_ms=config.request_timeout,
        politeness_delay_ms=config.politeness_delay_ms,
        honor_robots=config.honor_robots,
    )
    seed = _normalize_url(config.seed_url)
    seed_origin = _origin(seed)
    queue: List[Tuple[str, int]] = [(seed, 0)]
    visited = {seed}
    pages: List[CrawledPage] = []

    while queue and len(pages) < config.max_pages:
        url, depth = queue.pop(0)
        if not fetcher.allowed_by_robots(url):
            logger.info("robots.txt disallows %s", url)
            if url == seed:
                raise SeedUnreachable(f"robots.txt disallows the seed URL {url}")
            continue
        try:
            final_url, html = fetcher.fetch(url)
        except requests.RequestException as exc:
            if url == seed:
                raise SeedUnreachable(f"seed fetch failed: {exc}") from exc
            logger.warning("fetch failed for %s: %s", url, exc)
            pages.append(CrawledPage(url=url, final_url=url, depth=depth,
                                     fetched_at=_utcnow(), skipped_reason="fetch_error"))
            continue
        page = CrawledPage(url=url, final_url=_normalize_url(final_url), depth=depth,
                           raw_html=html, fetched_at=_utcnow())
        _gate_page(page, config)
        pages.append(page)
        logger.debug("fetched %s (depth %d, skipped=%s)", url, depth, page.skipped_reason)

        if depth >= config.max_depth or (not page.kept and depth != 0):
            continue
        for link in discover_tos_links(html, page.final_url, config.keyword_set):
            if config.same_origin_only and _origin(link) != seed_origin:
                continue
            if link not in visited:
                visited.add(link)
                queue.append((link, depth + 1))

    return dedupe_versions(pages)


def merge_pages(pages: Sequence[CrawledPage]) -> Tuple[str, List[str]]:
    """Concatenate kept pages in crawl order under per-page URL headings."""
    kept = [p for p in pages if p.kept]
    if not kept:
        raise NoContent("every crawled page was skipped")
    parts = [f"# {p.final_url}\n\n{p.cleaned_markdown}" for p in kept]
    return "\n\n".join(parts) + "\n", [p.final_url for p in kept]


def crawl_platform(config: CrawlConfig, platform_id: str, backend,
                   fetcher: Optional[HttpFetcher] = None):
    """Crawl, merge, segment, and embed one platform's ToS.

    Returns a fully populated TosDocument (see tosqa.store).
    """
    from .store import build_document

    pages = crawl_site(config, fetcher=fetcher)
    merged, source_urls = merge_pages(pages)
    return build_document(platform_id, merged, source_urls, backend)


def _utcnow() -> datetime:
    return datetime.now(timezone.utc)

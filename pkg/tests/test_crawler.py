import numpy as np
import pytest

from conftest import FixtureSite, build_tos_site
from tosqa.crawler import (
    CrawlConfig,
    CrawledPage,
    content_hash,
    crawl_platform,
    crawl_site,
    dedupe_versions,
    detect_language_english,
    detect_login_redirect,
    discover_tos_links,
    merge_pages,
)
from tosqa.embedding import ReferenceHashBackend
from tosqa.errors import NoContent, SeedUnreachable
from tosqa.text import STOPWORDS, tokenize

FAST = dict(politeness_delay_ms=5)


# --- link discovery ----------------------------------------------------------

def test_discover_keyword_in_text_and_path():
    html = '<a href="/legal/terms">Terms of Service</a>'
    assert discover_tos_links(html, "https://ex.com", ["terms"]) == ["https://ex.com/legal/terms"]


def test_discover_no_keyword_no_links():
    html = '<a href="/careers">Jobs</a>'
    assert discover_tos_links(html, "https://ex.com", ["terms", "privacy"]) == []


def test_discover_relative_reference_resolution():
    html = '<a href="../privacy">here</a>'
    assert discover_tos_links(html, "https://ex.com/a/b", ["privacy"]) == ["https://ex.com/privacy"]


def test_discover_excludes_fragments_and_schemes():
    html = """
    <a href="#terms">Terms anchor</a>
    <a href="mailto:legal@ex.com">legal email</a>
    <a href="javascript:void(0)">terms popup</a>
    <a href="/terms">Terms</a>
    """
    assert discover_tos_links(html, "https://ex.com", ["terms", "legal"]) == ["https://ex.com/terms"]


def test_discover_dedupes_in_document_order():
    html = """
    <a href="/privacy">Privacy</a>
    <a href="/terms">Terms</a>
    <a href="/privacy">Privacy again</a>
    """
    got = discover_tos_links(html, "https://ex.com", ["terms", "privacy"])
    assert got == ["https://ex.com/privacy", "https://ex.com/terms"]


def test_discover_is_idempotent():
    html = '<a href="/terms">Terms</a><a href="/legal">Legal</a>'
    first = discover_tos_links(html, "https://ex.com", ["terms", "legal"])
    second = discover_tos_links(html, "https://ex.com", ["terms", "legal"])
    assert first == second


def test_discover_matches_path_case_insensitively():
    html = '<a href="/LEGAL/Terms-Of-Use">read this</a>'
    assert discover_tos_links(html, "https://ex.com", ["terms"]) == [
        "https://ex.com/LEGAL/Terms-Of-Use"]


# --- gates --------------------------------------------------------------------

def test_login_redirect_by_path():
    page = CrawledPage(url="https://ex.com/terms", final_url="https://ex.com/login?next=/terms",
                       depth=0)
    assert detect_login_redirect(page)


def test_login_redirect_by_password_input():
    page = CrawledPage(url="https://ex.com/terms", final_url="https://ex.com/terms",
                       depth=0, raw_html='<form><input type="password"></form>')
    assert detect_login_redirect(page)


def test_login_redirect_negative():
    page = CrawledPage(url="https://ex.com/legal/terms", final_url="https://ex.com/legal/terms",
                       depth=0, raw_html="<p>Plain terms text.</p>")
    assert not detect_login_redirect(page)


ENGLISH_PARAGRAPH = """The service is provided to you under these terms and any
policies referenced in them. By accessing or using the service you agree that
you have read and understood the terms and that we may update them from time
to time. If you do not agree with the terms you must stop using the service.
We may suspend your account if you breach any of the obligations described in
this document, and you remain responsible for all activity under it."""

GERMAN_PARAGRAPH = """Die Nutzung der Plattform unterliegt den folgenden
Bedingungen. Durch den Zugriff auf den Dienst bestaetigen Sie, dass Sie diese
Bedingungen gelesen und verstanden haben. Wir behalten uns das Recht vor, die
Bedingungen jederzeit zu aendern. Wenn Sie mit den Bedingungen nicht
einverstanden sind, muessen Sie die Nutzung des Dienstes beenden. Wir koennen
Ihr Konto sperren, falls Sie gegen Ihre Pflichten verstossen, und Sie bleiben
fuer alle Aktivitaeten unter Ihrem Konto verantwortlich."""


def test_english_paragraph_detected():
    tokens = tokenize(ENGLISH_PARAGRAPH)
    ratio = sum(1 for t in tokens if t in STOPWORDS) / len(tokens)
    assert len(tokens) >= 20
    assert ratio >= 0.05  # derived by counting stopwords in the fixture
    assert detect_language_english(ENGLISH_PARAGRAPH)


def test_german_paragraph_rejected():
    tokens = tokenize(GERMAN_PARAGRAPH)
    ratio = sum(1 for t in tokens if t in STOPWORDS) / len(tokens)
    assert len(tokens) >= 20
    assert ratio < 0.05  # derived by counting stopwords in the fixture
    assert not detect_language_english(GERMAN_PARAGRAPH)


def test_short_snippet_rejected():
    assert not detect_language_english("the terms are short")


# --- version dedup --------------------------------------------------------------

def _page(url, markdown, depth=1):
    return CrawledPage(url=url, final_url=url, depth=depth, cleaned_markdown=markdown,
                       content_hash=content_hash(markdown))


def test_dedupe_identical_content():
    a = _page("https://ex.com/terms", "Same content here.")
    b = _page("https://ex.com/terms?ref=x", "Same content here.")
    kept = [p for p in dedupe_versions([a, b]) if p.kept]
    assert kept == [a]
    assert b.skipped_reason == "duplicate"


def test_dedupe_archive_marker_loses():
    a = _page("https://ex.com/legal/terms", "Current terms text.")
    b = _page("https://ex.com/legal/archive/2019/terms", "Old terms text.")
    dedupe_versions([a, b])
    assert a.kept
    assert b.skipped_reason == "duplicate"


def test_dedupe_greatest_date_segment_wins():
    a = _page("https://ex.com/terms/2021", "Terms from twenty one.")
    b = _page("https://ex.com/terms/2023", "Terms from twenty three.")
    dedupe_versions([a, b])
    assert b.kept
    assert a.skipped_reason == "duplicate"


def test_dedupe_version_segment():
    a = _page("https://ex.com/legal/v2/terms", "Version two text.")
    b = _page("https://ex.com/legal/terms", "Plain current text.")
    dedupe_versions([a, b])
    assert b.kept
    assert a.skipped_reason == "duplicate"


def test_dedupe_unrelated_paths_untouched():
    a = _page("https://ex.com/terms", "Terms text body.")
    b = _page("https://ex.com/privacy", "Privacy text body.")
    assert all(p.kept for p in dedupe_versions([a, b]))


# --- crawling the fixture site ---------------------------------------------------

def test_crawl_fixture_site(tos_site):
    config = CrawlConfig(seed_url=tos_site.url("/"), **FAST)
    pages = crawl_site(config)
    by_path = {p.url.replace(tos_site.base_url, ""): p for p in pages}

    assert by_path["/"].kept
    assert by_path["/terms"].kept
    assert by_path["/privacy"].kept
    assert by_path["/member-agreement"].skipped_reason == "login_redirect"
    assert by_path["/terms-duplicate"].skipped_reason == "duplicate"
    assert "/careers" not in by_path  # never fetched: anchor matches no keyword
    assert "/careers" not in tos_site.request_log

    merged, source_urls = merge_pages(pages)
    assert source_urls == [tos_site.url("/"), tos_site.url("/terms"), tos_site.url("/privacy")]
    assert "suspend or terminate your account" in merged
    assert "collect email addresses" in merged
    assert "hiring engineers" not in merged
    assert "Sign in to continue" not in merged
    assert f"# {tos_site.url('/terms')}" in merged

    # Only same-origin fetches, within the page budget (robots.txt excluded).
    page_requests = [p for p in tos_site.request_log if p != "/robots.txt"]
    assert len(page_requests) <= config.max_pages

    # Stored hashes recompute from the cleaned markdown.
    for page in pages:
        if page.kept:
            assert content_hash(page.cleaned_markdown) == page.content_hash


def test_crawl_respects_max_pages(tos_site):
    config = CrawlConfig(seed_url=tos_site.url("/"), max_pages=1, **FAST)
    pages = crawl_site(config)
    assert len(pages) == 1
    merged, source_urls = merge_pages(pages)
    assert source_urls == [tos_site.url("/")]
    page_requests = [p for p in tos_site.request_log if p != "/robots.txt"]
    assert page_requests == ["/"]


def test_crawl_respects_max_depth(tos_site):
    config = CrawlConfig(seed_url=tos_site.url("/"), max_depth=0, **FAST)
    pages = crawl_site(config)
    assert [p.url for p in pages] == [tos_site.url("/")]


def test_crawl_same_origin_only():
    site = build_tos_site()
    with site:
        # Inject a cross-origin keyword link into the seed page.
        status, headers, body = site.routes["/"]
        body = body.replace("</ul>", '<li><a href="https://other.example/terms">Terms</a></li></ul>')
        site.routes["/"] = (status, headers, body)
        config = CrawlConfig(seed_url=site.url("/"), **FAST)
        pages = crawl_site(config)
        assert all(p.url.startswith(site.base_url) for p in pages)


def test_crawl_recrawl_is_deterministic(tos_site):
    config = CrawlConfig(seed_url=tos_site.url("/"), **FAST)
    merged1, _ = merge_pages(crawl_site(config))
    merged2, _ = merge_pages(crawl_site(config))
    assert content_hash(merged1) == content_hash(merged2)


def test_crawl_seed_unreachable():
    config = CrawlConfig(seed_url="http://127.0.0.1:9/", request_timeout=300, **FAST)
    with pytest.raises(SeedUnreachable):
        crawl_site(config)


def test_crawl_no_content():
    site = FixtureSite()
    site.add_page("/", '<html><body><main><h1>Sign in</h1>'
                       '<input type="password"><p>Please sign in to view the terms '
                       'of the service and all related policies now.</p></main></body></html>')
    with site:
        config = CrawlConfig(seed_url=site.url("/"), **FAST)
        pages = crawl_site(config)
        with pytest.raises(NoContent):
            merge_pages(pages)


def test_crawl_honors_robots_disallow():
    site = build_tos_site()
    site.add_page("/robots.txt", "User-agent: *\nDisallow: /privacy\n",
                  headers={"Content-Type": "text/plain"})
    with site:
        config = CrawlConfig(seed_url=site.url("/"), **FAST)
        pages = crawl_site(config)
        assert "/privacy" not in [p.url.replace(site.base_url, "") for p in pages]
        assert "/privacy" not in site.request_log


def test_crawl_robots_can_be_disabled():
    site = build_tos_site()
    site.add_page("/robots.txt", "User-agent: *\nDisallow: /privacy\n",
                  headers={"Content-Type": "text/plain"})
    with site:
        config = CrawlConfig(seed_url=site.url("/"), honor_robots=False, **FAST)
        pages = crawl_site(config)
        assert "/privacy" in [p.url.replace(site.base_url, "") for p in pages]


def test_crawl_fetch_error_page_recorded():
    site = build_tos_site()
    del site.routes["/terms"]  # keyword link now 404s
    with site:
        config = CrawlConfig(seed_url=site.url("/"), **FAST)
        pages = crawl_site(config)
        failed = [p for p in pages if p.skipped_reason == "fetch_error"]
        assert [p.url.replace(site.base_url, "") for p in failed] == ["/terms"]


def test_crawl_non_english_page_skipped():
    site = build_tos_site()
    german = ("<html><body><article><h1>Nutzungsbedingungen</h1><p>" +
              " ".join(GERMAN_PARAGRAPH.split()) + "</p></article></body></html>")
    site.routes["/privacy"] = (200, {}, german)
    with site:
        config = CrawlConfig(seed_url=site.url("/"), **FAST)
        pages = crawl_site(config)
        by_path = {p.url.replace(site.base_url, ""): p for p in pages}
        assert by_path["/privacy"].skipped_reason == "non_english"


def test_crawl_language_filter_off():
    site = build_tos_site()
    german = ("<html><body><article><h1>Nutzungsbedingungen</h1><p>" +
              " ".join(GERMAN_PARAGRAPH.split()) + "</p></article></body></html>")
    site.routes["/privacy"] = (200, {}, german)
    with site:
        config = CrawlConfig(seed_url=site.url("/"), language_filter="off", **FAST)
        pages = crawl_site(config)
        by_path = {p.url.replace(site.base_url, ""): p for p in pages}
        assert by_path["/privacy"].kept


def test_crawl_platform_returns_document(tos_site):
    backend = ReferenceHashBackend(seed=42, dim=64)
    config = CrawlConfig(seed_url=tos_site.url("/"), **FAST)
    doc = crawl_platform(config, "example", backend)
    assert doc.platform_id == "example"
    assert doc.content_hash == content_hash(doc.merged_markdown)
    assert len(doc.sentences) > 0
    assert doc.sentences[0].sentence_id == 0
    for s in doc.sentences:
        assert abs(np.linalg.norm(s.embedding) - 1.0) <= 1e-9


def test_content_hash_pure_function():
    md = "Some cleaned markdown here."
    assert content_hash(md) == content_hash(md)
    assert content_hash(md) != content_hash(md + " ")


def test_config_validation():
    with pytest.raises(ValueError):
        CrawlConfig(seed_url="https://ex.com", max_pages=0)
    with pytest.raises(ValueError):
        CrawlConfig(seed_url="https://ex.com", max_depth=-1)
    with pytest.raises(ValueError):
        CrawlConfig(seed_url="https://ex.com", keyword_set=[])
    with pytest.raises(ValueError):
        CrawlConfig(seed_url="https://ex.com", request_timeout=0)
    cfg = CrawlConfig(seed_url="https://ex.com", keyword_set=["Terms", "EULA"])
    assert cfg.keyword_set == ["terms", "eula"]

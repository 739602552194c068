"""Shared fixtures: a local HTTP fixture site and synthetic corpora."""
from __future__ import annotations

import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Dict, List, Optional, Tuple

import numpy as np
import pytest

from tosqa.embedding import ReferenceHashBackend

TERMS_HTML = """<html><head><title>Terms</title></head><body>
<nav><a href="/">Home</a> <a href="/careers">Jobs</a></nav>
<article>
<h1>Terms of Service</h1>
<p>By accessing the service you agree to be bound by these terms and any
policies referenced within them. If you do not agree with any part of the
terms then you may not access the service.</p>
<p>We may suspend or terminate your account if you violate these terms. You
are responsible for safeguarding the password that you use to access the
service and for any activities under your account.</p>
<p>The service and its original content remain the exclusive property of the
company and its licensors. Our trademarks may not be used without the prior
written consent of the company.</p>
</article>
<footer>Copyright example</footer>
</body></html>"""

PRIVACY_HTML = """<html><head><title>Privacy</title></head><body>
<nav><a href="/">Home</a></nav>
<article>
<h1>Privacy Policy</h1>
<p>We collect email addresses and usage information from users so that we can
operate and improve the service. We never sell your personal data to third
parties, although we may share aggregate statistics with our partners.</p>
<p>You can request deletion of your personal data at any time and we will
honor the request within thirty days unless retention is required by law.</p>
</article>
</body></html>"""

SEED_HTML = """<html><head><title>Example Platform</title></head><body>
<nav><a href="/">Home</a></nav>
<article>
<h1>Example Platform</h1>
<p>Welcome to the Example platform. Before you use the service you should
review the legal documents listed below because they govern your relationship
with us and describe the rights and obligations of both parties.</p>
<ul>
<li><a href="/terms">Terms of Service</a></li>
<li><a href="/privacy">Privacy Policy</a></li>
<li><a href="/careers">Jobs</a></li>
<li><a href="/terms-duplicate">Old terms snapshot</a></li>
<li><a href="/member-agreement">Member agreement</a></li>
</ul>
</article>
</body></html>"""

CAREERS_HTML = """<html><body><article><h1>Jobs</h1>
<p>We are hiring engineers who love building reliable systems for the web and
care deeply about the craft of software development.</p>
</article></body></html>"""

LOGIN_HTML = """<html><body><main>
<h1>Sign in to continue</h1>
<form action="/session" method="post">
<input type="text" name="user"><input type="password" name="pass">
</form>
<p>Please sign in with your account credentials to view this page, or create
a new account if you have never registered with the service before.</p>
</main></body></html>"""


class _Handler(BaseHTTPRequestHandler):
    server_version = "FixtureHTTP/1.0"

    def do_GET(self):
        site: "FixtureSite" = self.server.site  # type: ignore[attr-defined]
        site.request_log.append(self.path)
        entry = site.routes.get(self.path)
        if entry is None:
            self.send_response(404)
            self.send_header("Content-Type", "text/plain")
            self.end_headers()
            self.wfile.write(b"not found")
            return
        status, headers, body = entry
        self.send_response(status)
        for key, value in headers.items():
            self.send_header(key, value)
        if "Content-Type" not in headers:
            self.send_header("Content-Type", "text/html; charset=utf-8")
        self.end_headers()
        self.wfile.write(body.encode("utf-8"))

    def log_message(self, fmt, *args):  # keep test output quiet
        pass


class FixtureSite:
    """Local HTTP server with a per-path route table and a request log."""

    def __init__(self, routes: Optional[Dict[str, Tuple[int, dict, str]]] = None):
        self.routes: Dict[str, Tuple[int, dict, str]] = routes or {}
        self.request_log: List[str] = []
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
        self._server.site = self  # type: ignore[attr-defined]
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def url(self, path: str) -> str:
        return self.base_url + path

    def add_page(self, path: str, body: str, status: int = 200,
                 headers: Optional[dict] = None) -> None:
        self.routes[path] = (status, headers or {}, body)

    def add_redirect(self, path: str, location: str) -> None:
        self.routes[path] = (302, {"Location": location}, "")

    def start(self) -> "FixtureSite":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()

    def __enter__(self) -> "FixtureSite":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()


class _JsonHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        import json as _json

        length = int(self.headers.get("Content-Length", "0"))
        body = _json.loads(self.rfile.read(length) or b"{}")
        handler = self.server.handler  # type: ignore[attr-defined]
        try:
            payload = handler(self.path, body)
            data = _json.dumps(payload).encode("utf-8")
            self.send_response(200)
        except Exception as exc:  # surface handler bugs as 500s
            data = _json.dumps({"error": str(exc)}).encode("utf-8")
            self.send_response(500)
        self.send_header("Content-Type", "application/json")
        self.end_headers()
        self.wfile.write(data)

    def log_message(self, fmt, *args):
        pass


class JsonEndpoint:
    """Tiny JSON-over-POST server for mocking external model backends."""

    def __init__(self, handler):
        self._server = ThreadingHTTPServer(("127.0.0.1", 0), _JsonHandler)
        self._server.handler = handler  # type: ignore[attr-defined]
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    @property
    def url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def __enter__(self) -> "JsonEndpoint":
        self._thread.start()
        return self

    def __exit__(self, *exc) -> None:
        self._server.shutdown()
        self._server.server_close()


def build_tos_site() -> FixtureSite:
    """The six-page fixture: seed, /terms, /privacy, /careers, /login, /terms-duplicate."""
    site = FixtureSite()
    site.add_page("/", SEED_HTML)
    site.add_page("/terms", TERMS_HTML)
    site.add_page("/privacy", PRIVACY_HTML)
    site.add_page("/careers", CAREERS_HTML)
    site.add_page("/login", LOGIN_HTML)
    site.add_page("/terms-duplicate", TERMS_HTML)
    site.add_redirect("/member-agreement", "/login")
    return site


@pytest.fixture
def tos_site():
    site = build_tos_site().start()
    yield site
    site.stop()


@pytest.fixture
def backend():
    return ReferenceHashBackend(seed=42, dim=384)


# --- synthetic corpora -------------------------------------------------------
# The generator lives in the package so users can run the evaluation
# pipeline without crawling; tests share that single source.
from tosqa.synth import planted_corpus, topic_vocabularies  # noqa: F401  (re-export)


def random_sentences(n: int, rng: np.random.Generator, vocab: Optional[List[str]] = None,
                     min_len: int = 5, max_len: int = 11) -> List[str]:
    """Random word sequences from a shared vocabulary."""
    if vocab is None:
        vocab = [f"word{i}" for i in range(300)]
    out = []
    for _ in range(n):
        length = int(rng.integers(min_len, max_len + 1))
        out.append(" ".join(vocab[int(rng.integers(len(vocab)))] for _ in range(length)) + ".")
    return out

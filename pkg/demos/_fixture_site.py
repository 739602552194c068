"""A tiny local ToS site the demos can crawl without touching the internet."""
from __future__ import annotations

import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

PAGES = {
    "/": """<html><body><article>
<h1>Demo Platform</h1>
<p>Welcome to the demo platform. The legal documents below govern your use of
the service and explain what happens to the data you entrust to us.</p>
<ul>
<li><a href="/terms">Terms of Service</a></li>
<li><a href="/privacy">Privacy Policy</a></li>
<li><a href="/careers">Careers</a></li>
</ul></article></body></html>""",
    "/terms": """<html><body><nav><a href="/">Home</a></nav><article>
<h1>Terms of Service</h1>
<p>By accessing the service you agree to be bound by these terms. We may
suspend or terminate your account if you violate any of the obligations
described here. You are responsible for all activity under your account.</p>
<p>The service is provided on an as-is basis without warranties of any kind.
Disputes arising from these terms are resolved through binding arbitration
rather than in court, except where the law says otherwise.</p>
<p>We may update these terms from time to time and will give you thirty days
notice before material changes take effect.</p>
</article></body></html>""",
    "/privacy": """<html><body><nav><a href="/">Home</a></nav><article>
<h1>Privacy Policy</h1>
<p>We collect email addresses and usage information so that we can operate
and improve the service. We never sell your personal data to third parties,
although aggregate statistics may be shared with our partners.</p>
<p>You can request deletion of your personal data at any time and we will
honor the request within thirty days unless retention is required by law.</p>
</article></body></html>""",
    "/careers": """<html><body><article><h1>Careers</h1>
<p>We are always hiring engineers who care about building reliable systems
and making legal text less hostile to the people who must accept it.</p>
</article></body></html>""",
}


class _Handler(BaseHTTPRequestHandler):
    def do_GET(self):
        body = PAGES.get(self.path)
        if body is None:
            self.send_response(404)
            self.end_headers()
            return
        self.send_response(200)
        self.send_header("Content-Type", "text/html; charset=utf-8")
        self.end_headers()
        self.wfile.write(body.encode("utf-8"))

    def log_message(self, fmt, *args):
        pass


def start_demo_site():
    """Returns (base_url, shutdown_callable)."""
    server = ThreadingHTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, port = server.server_address[:2]

    def stop():
        server.shutdown()
        server.server_close()

    return f"http://{host}:{port}", stop

"""Keeps the shared link-scan fixtures in sync with discover_tos_links.

The browser extension's scanner runs against the same HTML files and the
same expected_links.json, so this test guards the parity contract from the
server side.
"""
import json
import os

import pytest

from tosqa.crawler import DEFAULT_KEYWORDS, discover_tos_links

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "fixtures", "linkscan")


def load_expected():
    with open(os.path.join(FIXTURE_DIR, "expected_links.json"), encoding="utf-8") as fh:
        return json.load(fh)


def test_ten_fixtures_exist():
    expected = load_expected()
    html_files = sorted(f for f in os.listdir(FIXTURE_DIR) if f.endswith(".html"))
    assert len(html_files) == 10
    assert sorted(expected) == html_files


@pytest.mark.parametrize("name", sorted(load_expected()))
def test_fixture_matches_discover_output(name):
    expected = load_expected()[name]
    with open(os.path.join(FIXTURE_DIR, name), encoding="utf-8") as fh:
        html = fh.read()
    got = discover_tos_links(html, expected["base_url"], DEFAULT_KEYWORDS)
    assert got == expected["links"]

"""Main-content extraction and HTML to Markdown conversion.

Boilerplate elements are dropped, then every candidate block (article, main,
section, div) is scored by text density: score = text_length - 1.5 *
link_text_length over the candidate's subtree. The highest-scoring subtree
wins, ties going to the earliest in document order, and is rendered as
Markdown (h1-h6 to #..######, list items to "- ", paragraphs separated by
blank lines).
"""
from __future__ import annotations

import re
from typing import List, Optional

from .errors import EmptyContent
from .htmldom import HtmlNode, parse_html

BOILERPLATE_TAGS = frozenset({"nav", "header", "footer", "script", "style", "form", "noscript"})
CANDIDATE_TAGS = frozenset({"article", "main", "section", "div"})
LINK_PENALTY = 1.5
MIN_CONTENT_CHARS = 20

_HEADING_LEVEL = {f"h{i}": i for i in range(1, 7)}
_BLOCK_TAGS = frozenset(
    {"p", "div", "section", "article", "main", "ul", "ol", "li", "table", "tr",
     "blockquote", "pre", "body", "html", "#root"} | set(_HEADING_LEVEL)
)


def _strip_boilerplate(root: HtmlNode) -> None:
    doomed = [n for n in root.iter() if n.tag in BOILERPLATE_TAGS]
    for node in doomed:
        node.detach()


def _text_length(node: HtmlNode) -> int:
    return sum(len(n.text.strip()) for n in node.iter() if n.tag == "#text")


def _link_text_length(node: HtmlNode) -> int:
    total = 0
    for anchor in node.find_all("a"):
        total += sum(len(n.text.strip()) for n in anchor.iter() if n.tag == "#text")
    return total


def score_block(node: HtmlNode) -> float:
    """Readability density score for one candidate block."""
    return _text_length(node) - LINK_PENALTY * _link_text_length(node)


def select_main_content(root: HtmlNode) -> HtmlNode:
    """Highest-scoring candidate subtree, or the whole tree if none exist."""
    best: Optional[HtmlNode] = None
    best_score = float("-inf")
    for node in root.iter():  # iter() is document order, so ties keep the earliest
        if node.tag in CANDIDATE_TAGS:
            s = score_block(node)
            if s > best_score:
                best = node
                best_score = s
    return best if best is not None else root


_WS_RE = re.compile(r"\s+")


def _collapse(text: str) -> str:
    return _WS_RE.sub(" ", text).strip()


class _MarkdownWriter:
    def __init__(self) -> None:
        self.blocks: List[str] = []
        self._inline: List[str] = []

    def _flush_inline(self) -> None:
        text = _collapse("".join(self._inline))
        self._inline = []
        if text:
            self.blocks.append(text)

    def add_inline(self, text: str) -> None:
        self._inline.append(text)

    def add_block(self, text: str) -> None:
        self._flush_inline()
        if text:
            self.blocks.append(text)

    def render(self) -> str:
        self._flush_inline()
        return "\n\n".join(self.blocks).strip()


def _render_node(node: HtmlNode, writer: _MarkdownWriter) -> None:
    for child in node.children:
        tag = child.tag
        if tag == "#text":
            writer.add_inline(child.text)
        elif tag in _HEADING_LEVEL:
            text = _collapse(child.get_text())
            if text:
                writer.add_block("#" * _HEADING_LEVEL[tag] + " " + text)
        elif tag == "li":
            text = _collapse(child.get_text())
            if text:
                writer.add_block("- " + text)
        elif tag in ("ul", "ol"):
            writer._flush_inline()
            items = []
            for li in child.children:
                if li.tag == "li":
                    text = _collapse(li.get_text())
                    if text:
                        items.append("- " + text)
            if items:
                writer.blocks.append("\n".join(items))
        elif tag == "br":
            writer.add_inline(" ")
        elif tag == "a":
            writer.add_inline(" " + child.get_text() + " ")
        elif tag in _BLOCK_TAGS:
            writer._flush_inline()
            _render_node(child, writer)
            writer._flush_inline()
        else:
            # Unknown or inline element: recurse transparently.
            _render_node(child, writer)


def to_markdown(node: HtmlNode) -> str:
    writer = _MarkdownWriter()
    _render_node(node, writer)
    return writer.render()


def clean_content(raw_html: str) -> str:
    """Extract the main content of a page as Markdown.

    Raises EmptyContent when fewer than 20 non-whitespace characters remain
    after boilerplate removal and content selection.
    """
    root = parse_html(raw_html)
    _strip_boilerplate(root)
    main = select_main_content(root)
    markdown = to_markdown(main)
    if len(re.sub(r"\s", "", markdown)) < MIN_CONTENT_CHARS:
        raise EmptyContent("cleaned page holds fewer than 20 non-whitespace characters")
    return markdown

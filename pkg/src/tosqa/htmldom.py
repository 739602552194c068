"""A small, lenient HTML DOM built on html.parser.

The standard-library parser is error tolerant: mismatched or unclosed tags
never raise. This module adds just enough tree structure for link discovery,
boilerplate removal, and content scoring. It is not a general-purpose DOM.
"""
from __future__ import annotations

from html.parser import HTMLParser
from typing import Dict, Iterator, List, Optional

from .errors import UnparseableHtml

VOID_TAGS = frozenset(
    "area base br col embed hr img input link meta param source track wbr".split()
)

# Opening one of these tags implicitly closes a still-open sibling.
_AUTOCLOSE = {
    "p": {"p"},
    "li": {"li"},
    "tr": {"tr", "td", "th"},
    "td": {"td", "th"},
    "th": {"td", "th"},
    "option": {"option"},
}


class HtmlNode:
    """Element or text node. Text nodes have tag '#text' and no children."""

    __slots__ = ("tag", "attrs", "children", "parent", "text")

    def __init__(self, tag: str, attrs: Optional[Dict[str, str]] = None, text: str = ""):
        self.tag = tag
        self.attrs = attrs or {}
        self.children: List[HtmlNode] = []
        self.parent: Optional[HtmlNode] = None
        self.text = text

    def append(self, node: "HtmlNode") -> None:
        node.parent = self
        self.children.append(node)

    def iter(self) -> Iterator["HtmlNode"]:
        """Depth-first iteration including self (document order)."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def find_all(self, *tags: str) -> List["HtmlNode"]:
        wanted = set(tags)
        return [n for n in self.iter() if n.tag in wanted]

    def get_text(self, separator: str = " ") -> str:
        parts = [n.text for n in self.iter() if n.tag == "#text" and n.text.strip()]
        return separator.join(p.strip() for p in parts)

    def detach(self) -> None:
        if self.parent is not None:
            self.parent.children.remove(self)
            self.parent = None

    def __repr__(self) -> str:  # pragma: no cover
        if self.tag == "#text":
            return f"#text({self.text[:30]!r})"
        return f"<{self.tag} children={len(self.children)}>"


class _TreeBuilder(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.root = HtmlNode("#root")
        self.stack = [self.root]

    def handle_starttag(self, tag, attrs):
        top = self.stack[-1]
        if top.tag in _AUTOCLOSE.get(tag, ()):
            self.stack.pop()
        node = HtmlNode(tag, dict(attrs))
        self.stack[-1].append(node)
        if tag not in VOID_TAGS:
            self.stack.append(node)

    def handle_startendtag(self, tag, attrs):
        self.stack[-1].append(HtmlNode(tag, dict(attrs)))

    def handle_endtag(self, tag):
        for i in range(len(self.stack) - 1, 0, -1):
            if self.stack[i].tag == tag:
                del self.stack[i:]
                return
        # Stray close tag: ignore.

    def handle_data(self, data):
        if data:
            self.stack[-1].append(HtmlNode("#text", text=data))


def parse_html(html) -> HtmlNode:
    """Parse HTML leniently into a node tree.

    Raises UnparseableHtml only when the input is not decodable text.
    """
    if isinstance(html, bytes):
        try:
            html = html.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise UnparseableHtml(f"input is not decodable text: {exc}") from exc
    if not isinstance(html, str):
        raise UnparseableHtml(f"expected text, got {type(html).__name__}")
    builder = _TreeBuilder()
    builder.feed(html)
    builder.close()
    return builder.root

"""Tokenization, the built-in stopword list, and sentence segmentation.

All token-level behavior in the package funnels through ``tokenize`` so the
embedder, the relevance scorer, the language filter, and the question
generator agree on what a word is.
"""
from __future__ import annotations

import re
from collections import Counter
from typing import Iterable, List

# Fixed English function-word list (117 words). Used for language detection,
# relevance scoring, question generation, and top-term extraction.
STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because been
before being below between both but by can cannot could did do does doing down
during each few for from further had has have having he her here hers herself
him himself his how i if in into is it its itself just me more most my myself
no nor not now of off on once only or other our ours ourselves out over own
same shall she should so some such than that the their theirs them themselves
then there these they this those through to too under until up very was we
were what when where which while who whom why will with would you your yours
yourself yourselves may might must also
""".split())

_TOKEN_RE = re.compile(r"[a-z0-9]+")

# Abbreviations that keep a following "." from terminating a sentence.
# Matched literally (case-sensitive) against the text ending at the dot.
ABBREVIATIONS = ("e.g.", "i.e.", "etc.", "Inc.", "Ltd.", "No.")

MIN_SENTENCE_TOKENS = 4


def tokenize(text: str) -> List[str]:
    """Lowercase and split on non-alphanumerics."""
    return _TOKEN_RE.findall(text.lower())


def content_tokens(text: str) -> List[str]:
    """Tokens with stopwords removed, document order preserved."""
    return [t for t in tokenize(text) if t not in STOPWORDS]


def content_token_set(text: str) -> set:
    return set(content_tokens(text))


def token_counts(tokens: Iterable[str]) -> Counter:
    return Counter(tokens)


# --- markdown stripping -----------------------------------------------------

_HEADING_RE = re.compile(r"^(#{1,6})\s+(.*)$")
_LIST_ITEM_RE = re.compile(r"^\s*(?:[-*+]|\d+[.)])\s+(.*)$")
_BLOCKQUOTE_RE = re.compile(r"^\s*>\s?(.*)$")
_RULE_RE = re.compile(r"^\s*(?:-{3,}|\*{3,}|_{3,})\s*$")
_IMAGE_RE = re.compile(r"!\[([^\]]*)\]\([^)]*\)")
_LINK_RE = re.compile(r"\[([^\]]*)\]\([^)]*\)")
_AUTOLINK_RE = re.compile(r"<(https?://[^>\s]+)>")
_CODE_RE = re.compile(r"`([^`]*)`")
_EMPHASIS_RE = re.compile(r"(\*\*|__|\*|_)(?=\S)(.+?)(?<=\S)\1")


def _strip_inline_markup(line: str) -> str:
    line = _IMAGE_RE.sub(r"\1", line)
    line = _LINK_RE.sub(r"\1", line)
    line = _AUTOLINK_RE.sub(r"\1", line)
    line = _CODE_RE.sub(r"\1", line)
    # Apply emphasis removal twice so nested markers like ***x*** unwrap.
    line = _EMPHASIS_RE.sub(r"\2", line)
    line = _EMPHASIS_RE.sub(r"\2", line)
    return line


def _markdown_blocks(markdown: str) -> List[str]:
    """Split Markdown into plain-text blocks.

    Headings and list items become their own block (they are newline
    terminated, so the block boundary acts as a sentence terminator).
    Consecutive plain lines join into one paragraph block.
    """
    blocks: List[str] = []
    paragraph: List[str] = []

    def flush() -> None:
        if paragraph:
            blocks.append(" ".join(paragraph))
            paragraph.clear()

    in_fence = False
    for raw_line in markdown.splitlines():
        line = raw_line.rstrip()
        if line.lstrip().startswith("```"):
            in_fence = not in_fence
            flush()
            continue
        if in_fence:
            continue
        if not line.strip():
            flush()
            continue
        if _RULE_RE.match(line):
            flush()
            continue
        m = _HEADING_RE.match(line)
        if m:
            flush()
            blocks.append(_strip_inline_markup(m.group(2)).strip())
            continue
        m = _LIST_ITEM_RE.match(line)
        if m:
            flush()
            blocks.append(_strip_inline_markup(m.group(1)).strip())
            continue
        m = _BLOCKQUOTE_RE.match(line)
        if m:
            line = m.group(1)
        paragraph.append(_strip_inline_markup(line).strip())
    flush()
    return [b for b in blocks if b]


def _ends_with_abbreviation(text: str, dot_index: int) -> bool:
    head = text[: dot_index + 1]
    for abbr in ABBREVIATIONS:
        if head.endswith(abbr):
            before = dot_index - len(abbr)
            if before < 0 or not (text[before].isalnum() or text[before] == "."):
                return True
    return False


def _split_terminated(block: str) -> List[str]:
    """Split one block on sentence terminators with the abbreviation guard.

    A ``.`` ``!`` or ``?`` terminates only when followed by whitespace or the
    block end, so dotted tokens like "example.com" or "5.2" never split.
    """
    segments: List[str] = []
    start = 0
    for i, ch in enumerate(block):
        if ch not in ".!?":
            continue
        if i + 1 < len(block) and not block[i + 1].isspace():
            continue
        if ch == "." and _ends_with_abbreviation(block, i):
            continue
        seg = block[start : i + 1].strip()
        if seg:
            segments.append(seg)
        start = i + 1
    tail = block[start:].strip()
    if tail:
        segments.append(tail)
    return segments


def segment_sentences(markdown: str) -> List[str]:
    """Segment Markdown into statement strings.

    Markup is stripped to plain text, blocks split on sentence terminators,
    and segments with fewer than 4 word tokens dropped. Document order is
    preserved and each segment is trimmed. Empty input yields an empty list.
    """
    out: List[str] = []
    for block in _markdown_blocks(markdown):
        for seg in _split_terminated(block):
            if len(tokenize(seg)) >= MIN_SENTENCE_TOKENS:
                out.append(seg)
    return out

"""Question answering: nearest-sentence retrieval plus a relevance gate.

Retrieval is an exact linear scan for the sentence with the highest cosine
similarity to the query embedding. A relevance score b in [0, 1] between the
question and the retrieved sentence then gates the answer: below the
threshold tau the configured fallback statement is returned instead, with
the best candidate's scores kept for diagnostics.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np
import requests

from .embedding import cosine_similarity
from .errors import BackendUnavailable, DimensionMismatch, EmptyIndex
from .text import content_token_set

DEFAULT_TAU = 0.3
DEFAULT_FALLBACK = "No valid answer could be found within this document."


@dataclass
class QaConfig:
    tau: float = DEFAULT_TAU
    fallback_text: str = DEFAULT_FALLBACK
    relevance_backend: str = "reference_overlap"
    relevance_endpoint: Optional[str] = None

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must be in [0, 1], got {self.tau}")
        if self.relevance_backend not in ("reference_overlap", "external"):
            raise ValueError(f"unknown relevance backend: {self.relevance_backend!r}")
        if self.relevance_backend == "external" and not self.relevance_endpoint:
            raise ValueError("external relevance backend requires relevance_endpoint")


@dataclass
class Answer:
    sentence_id: int
    text: str
    similarity: float
    relevance: float
    accepted: bool
    fallback_message: Optional[str] = None

    def to_dict(self) -> dict:
        d = {
            "sentence_id": self.sentence_id,
            "answer": self.text,
            "similarity": self.similarity,
            "relevance": self.relevance,
            "accepted": self.accepted,
        }
        if self.fallback_message is not None:
            d["fallback"] = self.fallback_message
        return d


class DocumentIndex:
    """Sentence texts and their embeddings for one document."""

    def __init__(self, sentence_ids: Sequence[int], texts: Sequence[str],
                 matrix: np.ndarray, backend=None):
        if len(sentence_ids) != len(texts) or len(texts) != matrix.shape[0]:
            raise ValueError("index parts disagree in length")
        self.sentence_ids = list(sentence_ids)
        self.texts = list(texts)
        self.matrix = np.asarray(matrix, dtype=np.float64)
        self.backend = backend
        self._by_id = {sid: i for i, sid in enumerate(self.sentence_ids)}

    @classmethod
    def from_texts(cls, texts: Sequence[str], backend) -> "DocumentIndex":
        matrix = backend.embed_many(texts)
        return cls(range(len(texts)), texts, matrix, backend)

    @classmethod
    def from_document(cls, doc, backend=None) -> "DocumentIndex":
        """Build from a TosDocument whose sentences carry embeddings."""
        ids = [s.sentence_id for s in doc.sentences]
        texts = [s.text for s in doc.sentences]
        matrix = np.vstack([np.asarray(s.embedding, dtype=np.float64) for s in doc.sentences])
        return cls(ids, texts, matrix, backend)

    def __len__(self) -> int:
        return len(self.texts)

    def entries(self) -> Iterable[Tuple[int, np.ndarray]]:
        for i, sid in enumerate(self.sentence_ids):
            yield sid, self.matrix[i]

    def text_for(self, sentence_id: int) -> str:
        return self.texts[self._by_id[sentence_id]]

    def vector_for(self, sentence_id: int) -> np.ndarray:
        return self.matrix[self._by_id[sentence_id]]


def retrieve_best(query_vec: np.ndarray, index) -> Tuple[int, float]:
    """Exact linear scan for the highest-cosine entry.

    ``index`` is a DocumentIndex or an iterable of (sentence_id, vector)
    pairs. Ties break to the smallest sentence_id.
    """
    entries = index.entries() if isinstance(index, DocumentIndex) else index
    query_vec = np.asarray(query_vec, dtype=np.float64)
    best_id: Optional[int] = None
    best_sim = -2.0
    seen = 0
    for sentence_id, vec in entries:
        seen += 1
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != query_vec.shape:
            raise DimensionMismatch(f"query dim {query_vec.shape} vs entry dim {vec.shape}")
        sim = cosine_similarity(query_vec, vec)
        if sim > best_sim or (sim == best_sim and sentence_id < best_id):
            best_sim = sim
            best_id = sentence_id
    if seen == 0:
        raise EmptyIndex("cannot retrieve from an empty index")
    return best_id, best_sim


def relevance_score(question: str, candidate: str, backend: str = "reference_overlap",
                    endpoint: Optional[str] = None, timeout: float = 30.0) -> float:
    """Relevance b in [0, 1] between a question and a candidate answer.

    The reference backend is the Jaccard overlap of stopword-filtered token
    sets (empty union scores 0.0: no shared evidence). The external backend
    posts both strings to an NLI-style endpoint and expects {"score": x};
    the question is sent as the premise and the candidate as the hypothesis.
    """
    if not question.strip() or not candidate.strip():
        raise ValueError("question and candidate must be non-empty")
    if backend == "reference_overlap":
        q_tokens = content_token_set(question)
        c_tokens = content_token_set(candidate)
        union = q_tokens | c_tokens
        if not union:
            return 0.0
        return len(q_tokens & c_tokens) / len(union)
    if backend != "external":
        raise ValueError(f"unknown relevance backend: {backend!r}")
    try:
        resp = requests.post(
            endpoint, json={"question": question, "candidate": candidate}, timeout=timeout
        )
        resp.raise_for_status()
        score = float(resp.json()["score"])
    except (requests.RequestException, KeyError, TypeError, ValueError) as exc:
        raise BackendUnavailable(f"relevance endpoint failed: {exc}") from exc
    return min(1.0, max(0.0, score))


def answer_query(question: str, document_index: DocumentIndex,
                 cfg: Optional[QaConfig] = None) -> Answer:
    """Embed the question, retrieve the best sentence, and gate on relevance."""
    cfg = cfg or QaConfig()
    if document_index.backend is None:
        raise ValueError("document index has no embedding backend attached")
    query_vec = document_index.backend.embed(question)
    sentence_id, similarity = retrieve_best(query_vec, document_index)
    text = document_index.text_for(sentence_id)
    relevance = relevance_score(
        question, text, backend=cfg.relevance_backend, endpoint=cfg.relevance_endpoint
    )
    accepted = relevance >= cfg.tau
    return Answer(
        sentence_id=sentence_id,
        text=text,
        similarity=similarity,
        relevance=relevance,
        accepted=accepted,
        fallback_message=None if accepted else cfg.fallback_text,
    )


@dataclass
class TimedAnswer:
    """Answer plus the retrieval + verification wall time."""

    answer: Answer
    timing_ms: float


def answer_query_timed(question: str, document_index: DocumentIndex,
                       cfg: Optional[QaConfig] = None) -> TimedAnswer:
    start = time.perf_counter()
    answer = answer_query(question, document_index, cfg)
    return TimedAnswer(answer=answer, timing_ms=(time.perf_counter() - start) * 1000.0)

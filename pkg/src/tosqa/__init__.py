"""tosqa: self-hosted Terms-of-Service question answering.

Crawls and normalizes multi-page ToS documents, answers natural-language
questions through embedding retrieval with a relevance gate, and measures
its own answer quality with a clustering-based evaluation pipeline that
needs no manual annotation.
"""

__version__ = "0.1.0"

from .embedding import (  # noqa: E402
    EmbeddingBackendSpec,
    ExternalEmbeddingBackend,
    ReferenceHashBackend,
    cosine_similarity,
    embed,
    make_backend,
)
from .text import segment_sentences, tokenize, STOPWORDS  # noqa: E402
from .qa import Answer, DocumentIndex, QaConfig, answer_query, relevance_score, retrieve_best  # noqa: E402
from .kmeans import ClusterModel, assign_cluster, fit_kmeans  # noqa: E402

__all__ = [
    "Answer",
    "ClusterModel",
    "DocumentIndex",
    "EmbeddingBackendSpec",
    "ExternalEmbeddingBackend",
    "QaConfig",
    "ReferenceHashBackend",
    "STOPWORDS",
    "answer_query",
    "assign_cluster",
    "cosine_similarity",
    "embed",
    "fit_kmeans",
    "make_backend",
    "relevance_score",
    "retrieve_best",
    "segment_sentences",
    "tokenize",
]

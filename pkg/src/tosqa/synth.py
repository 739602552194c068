"""Synthetic reference corpora with planted, disjoint topic vocabularies.

Useful for exercising the evaluation pipeline without crawling anything:
each topic owns its own token vocabulary, so embeddings cluster cleanly and
the planted partition is a known ground truth.
"""
from __future__ import annotations

from typing import List, Tuple

import numpy as np

TOPIC_STEMS = ["privacy", "billing", "liability", "content", "security", "license",
               "arbitration", "termination"]


def topic_vocabularies(n_topics: int, vocab_size: int = 30) -> List[List[str]]:
    """Disjoint per-topic vocabularies of made-up but pronounceable tokens."""
    vocabularies = []
    for t in range(n_topics):
        stem = TOPIC_STEMS[t % len(TOPIC_STEMS)]
        vocabularies.append([f"{stem}{t}word{i}" for i in range(vocab_size)])
    return vocabularies


def planted_corpus(n_topics: int, sentences_per_topic: int, vocab_size: int = 30,
                   corpus_seed: int = 6, min_len: int = 5,
                   max_len: int = 9) -> Tuple[List[str], List[int]]:
    """Sentences drawn from disjoint topic vocabularies.

    Returns (texts, topic_labels). Each sentence is ``min_len``..``max_len``
    tokens sampled with replacement from its topic's vocabulary plus a
    terminal period, so every sentence clears the 4-token segmentation
    floor. Deterministic for a fixed corpus_seed.
    """
    rng = np.random.default_rng(corpus_seed)
    vocabularies = topic_vocabularies(n_topics, vocab_size)
    texts: List[str] = []
    labels: List[int] = []
    for topic in range(n_topics):
        vocab = vocabularies[topic]
        for _ in range(sentences_per_topic):
            length = int(rng.integers(min_len, max_len + 1))
            words = [vocab[int(rng.integers(len(vocab)))] for _ in range(length)]
            texts.append(" ".join(words) + ".")
            labels.append(topic)
    return texts, labels

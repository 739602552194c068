"""Annotation-free QA evaluation through topic-cluster agreement.

Preparation: embed a reference corpus of ToS statements and fit k-means, so
each cluster stands for one topic. Application: generate a synthetic
question per statement, ask the QA engine, and mark the answer correct when
it lands in the same cluster as the statement that produced the question.
Accuracy over all generated questions quantifies answer quality without any
manual labels.
"""
from __future__ import annotations

import csv
import io
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
import requests

from .errors import BackendUnavailable, StatementTooShort, UnlabeledCluster
from .kmeans import ClusterModel, assign_many
from .qa import Answer
from .text import MIN_SENTENCE_TOKENS, STOPWORDS, tokenize

logger = logging.getLogger(__name__)

QUESTION_TEMPLATE = "What does the service state about {t1} and {t2}?"
TOP_TERMS_PER_CLUSTER = 10


@dataclass
class GeneratedQuestion:
    statement_id: int
    question_text: str
    generator: str  # template_reference | external


@dataclass
class QepReport:
    platform_id: str
    k: int
    n_questions: int
    n_correct: int
    accuracy: float
    confusion: np.ndarray  # (k, k); rows = statement cluster, cols = answer cluster
    per_cluster_counts: np.ndarray  # length k; statements per cluster
    n_skipped: int = 0
    n_rejected: int = 0

    def to_dict(self) -> dict:
        return {
            "platform_id": self.platform_id,
            "k": self.k,
            "n_questions": self.n_questions,
            "n_correct": self.n_correct,
            "accuracy": self.accuracy,
            "confusion": self.confusion.tolist(),
            "per_cluster_counts": self.per_cluster_counts.tolist(),
            "n_skipped": self.n_skipped,
            "n_rejected": self.n_rejected,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass
class TopicLabeling:
    """Human-assigned topic names per cluster, with supporting top terms."""

    labels: Dict[int, str]
    top_terms: Dict[int, List[str]] = field(default_factory=dict)


def generate_question(statement: str, generator: str = "template_reference",
                      endpoint: Optional[str] = None, statement_id: int = -1,
                      timeout: float = 30.0) -> GeneratedQuestion:
    """Produce a synthetic question for one statement.

    The template generator picks the two highest-frequency non-stopword
    tokens (ties by document order; stopwords pad in the same way if fewer
    than two content tokens exist) and fills a fixed question template, so
    output is deterministic. The external generator posts to a text-to-text
    endpoint: {"statements": [...]} -> {"questions": [...]}.
    """
    tokens = tokenize(statement)
    if len(tokens) < MIN_SENTENCE_TOKENS:
        raise StatementTooShort(f"need >= {MIN_SENTENCE_TOKENS} word tokens, got {len(tokens)}")
    if generator == "template_reference":
        candidates = [t for t in tokens if t not in STOPWORDS]
        if len(candidates) < 2:
            candidates += [t for t in tokens if t in STOPWORDS]
        counts = Counter(candidates)
        first_pos = {}
        for i, t in enumerate(candidates):
            first_pos.setdefault(t, i)
        ranked = sorted(counts, key=lambda t: (-counts[t], first_pos[t]))
        t1, t2 = ranked[0], ranked[1]
        text = QUESTION_TEMPLATE.format(t1=t1, t2=t2)
        return GeneratedQuestion(statement_id=statement_id, question_text=text,
                                 generator=generator)
    if generator != "external":
        raise ValueError(f"unknown question generator: {generator!r}")
    try:
        resp = requests.post(endpoint, json={"statements": [statement]}, timeout=timeout)
        resp.raise_for_status()
        question = str(resp.json()["questions"][0]).strip()
    except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
        raise BackendUnavailable(f"question generator endpoint failed: {exc}") from exc
    if not question.endswith("?"):
        question += "?"
    return GeneratedQuestion(statement_id=statement_id, question_text=question,
                             generator=generator)


def run_qep(doc, model: ClusterModel, qa: Callable[[str], Answer],
            generator: str = "template_reference", endpoint: Optional[str] = None,
            count_rejected_as_incorrect: bool = False) -> QepReport:
    """Score a QA engine against one document.

    ``qa`` maps a question to an Answer whose sentence_id points into
    ``doc``. By default the retrieved sentence is scored whether or not the
    relevance gate accepted it; with count_rejected_as_incorrect=True a
    gated answer never counts as correct (its cluster pair still lands in
    the confusion matrix, so the trace can exceed n_correct in that mode).
    Statements shorter than the question generator's minimum are skipped.
    """
    matrix = np.vstack([np.asarray(s.embedding, dtype=np.float64) for s in doc.sentences])
    assignments = assign_many(model, matrix)
    per_cluster = np.bincount(assignments, minlength=model.k)

    confusion = np.zeros((model.k, model.k), dtype=np.int64)
    n_questions = 0
    n_correct = 0
    n_skipped = 0
    n_rejected = 0
    for sentence, d_cluster in zip(doc.sentences, assignments):
        try:
            question = generate_question(sentence.text, generator=generator,
                                         endpoint=endpoint, statement_id=sentence.sentence_id)
        except StatementTooShort:
            n_skipped += 1
            continue
        answer = qa(question.question_text)
        a_cluster = int(assignments[answer.sentence_id])
        n_questions += 1
        confusion[int(d_cluster), a_cluster] += 1
        if not answer.accepted:
            n_rejected += 1
        matched = a_cluster == int(d_cluster)
        if matched and (answer.accepted or not count_rejected_as_incorrect):
            n_correct += 1

    accuracy = n_correct / n_questions if n_questions else 0.0
    return QepReport(
        platform_id=doc.platform_id,
        k=model.k,
        n_questions=n_questions,
        n_correct=n_correct,
        accuracy=accuracy,
        confusion=confusion,
        per_cluster_counts=per_cluster,
        n_skipped=n_skipped,
        n_rejected=n_rejected,
    )


def make_identity_qa(doc) -> Callable[[str], Answer]:
    """QA oracle that answers every question with its source statement.

    Relies on questions arriving in document order for statements long
    enough to generate one, exactly as run_qep iterates.
    """
    eligible = [s for s in doc.sentences if len(tokenize(s.text)) >= MIN_SENTENCE_TOKENS]
    state = {"i": 0}

    def qa(question: str) -> Answer:
        sentence = eligible[state["i"] % len(eligible)]
        state["i"] += 1
        return Answer(sentence_id=sentence.sentence_id, text=sentence.text,
                      similarity=1.0, relevance=1.0, accepted=True)

    return qa


def make_random_qa(doc, seed: int = 0) -> Callable[[str], Answer]:
    """QA oracle that answers with a uniformly random statement."""
    rng = np.random.default_rng(seed)
    sentences = doc.sentences

    def qa(question: str) -> Answer:
        sentence = sentences[int(rng.integers(len(sentences)))]
        return Answer(sentence_id=sentence.sentence_id, text=sentence.text,
                      similarity=0.0, relevance=1.0, accepted=True)

    return qa


def cluster_top_terms(model: ClusterModel, corpus_sentences) -> Dict[int, List[str]]:
    """Ten highest-count content tokens per cluster (ties lexicographic)."""
    counters: Dict[int, Counter] = {c: Counter() for c in range(model.k)}
    matrix = np.vstack([np.asarray(s.embedding, dtype=np.float64) for s in corpus_sentences])
    assignments = assign_many(model, matrix)
    for sentence, cluster in zip(corpus_sentences, assignments):
        tokens = [t for t in tokenize(sentence.text) if t not in STOPWORDS]
        counters[int(cluster)].update(tokens)
    out: Dict[int, List[str]] = {}
    for cluster, counter in counters.items():
        ranked = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
        out[cluster] = [t for t, _ in ranked[:TOP_TERMS_PER_CLUSTER]]
    return out


def topic_distribution(doc, model: ClusterModel, labeling: TopicLabeling) -> Dict[str, float]:
    """Share of document statements per labeled topic; shares sum to 1."""
    missing = [c for c in range(model.k) if c not in labeling.labels]
    if missing:
        raise UnlabeledCluster(f"clusters without a topic label: {missing}")
    if not doc.sentences:
        raise ValueError("document has no statements")
    matrix = np.vstack([np.asarray(s.embedding, dtype=np.float64) for s in doc.sentences])
    assignments = assign_many(model, matrix)
    counts = np.bincount(assignments, minlength=model.k)
    out: Dict[str, float] = {}
    for cluster in range(model.k):
        topic = labeling.labels[cluster]
        out[topic] = out.get(topic, 0.0) + counts[cluster] / len(doc.sentences)
    return out


# --- table emitters ---------------------------------------------------------

def format_accuracy_table(rows: Dict[str, Dict[int, float]]) -> str:
    """Aligned text table: one platform per row, one column per k."""
    ks = sorted({k for accs in rows.values() for k in accs})
    header = ["Platform"] + [str(k) for k in ks]
    lines = [header] + [
        [platform] + [f"{accs[k]:.3f}" if k in accs else "-" for k in ks]
        for platform, accs in rows.items()
    ]
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    rendered = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip()
                for line in lines]
    rendered.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(rendered)


def accuracy_table_csv(rows: Dict[str, Dict[int, float]]) -> str:
    ks = sorted({k for accs in rows.values() for k in accs})
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["platform"] + [f"k={k}" for k in ks])
    for platform, accs in rows.items():
        writer.writerow([platform] + [f"{accs[k]:.6f}" if k in accs else "" for k in ks])
    return buf.getvalue()


def format_topic_table(rows: Dict[str, Dict[str, float]]) -> str:
    """Aligned text table of topic proportions per platform."""
    topics = sorted({t for dist in rows.values() for t in dist})
    header = ["Platform"] + topics
    lines = [header] + [
        [platform] + [f"{dist.get(t, 0.0):.2f}" for t in topics]
        for platform, dist in rows.items()
    ]
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    rendered = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(line)).rstrip()
                for line in lines]
    rendered.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(rendered)


def topic_table_csv(rows: Dict[str, Dict[str, float]]) -> str:
    topics = sorted({t for dist in rows.values() for t in dist})
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["platform"] + topics)
    for platform, dist in rows.items():
        writer.writerow([platform] + [f"{dist.get(t, 0.0):.6f}" for t in topics])
    return buf.getvalue()

"""Evaluate answer quality without any labeled data.

The evaluation pipeline clusters statement embeddings into k topics, asks a
synthetic question per statement, and marks an answer correct when it lands
in the same topic cluster as the statement that spawned the question. The
demo runs a k sweep on a synthetic corpus with four planted topics, then
prints the topic-distribution table for human-assigned labels.

    python demos/03_qep_evaluation.py
"""
import numpy as np

from tosqa.embedding import ReferenceHashBackend
from tosqa.kmeans import fit_kmeans
from tosqa.qa import DocumentIndex, QaConfig, answer_query
from tosqa.qep import (
    TopicLabeling,
    cluster_top_terms,
    format_accuracy_table,
    format_topic_table,
    generate_question,
    run_qep,
    topic_distribution,
)
from tosqa.store import build_document

TOPICS = {
    "privacy": ["data", "email", "collect", "share", "delete", "retention", "consent"],
    "billing": ["payment", "invoice", "subscription", "renewal", "refund", "charge", "fee"],
    "liability": ["warranty", "damages", "liable", "indemnify", "disclaim", "loss", "risk"],
    "termination": ["suspend", "terminate", "violation", "breach", "close", "ban", "appeal"],
}

rng = np.random.default_rng(0)
texts = []
for words in TOPICS.values():
    for _ in range(40):
        picks = [words[int(rng.integers(len(words)))] for _ in range(6)]
        texts.append("The service may " + " ".join(picks) + ".")

backend = ReferenceHashBackend(seed=42, dim=384)
doc = build_document("demo-corpus", "\n\n".join(texts), ["demo://corpus"], backend)
vectors = np.vstack([s.embedding for s in doc.sentences])
index = DocumentIndex.from_document(doc, backend=backend)

sample = doc.sentences[0].text
print(f"statement: {sample}")
print(f"generated question: {generate_question(sample).question_text}\n")


def qa(question):
    return answer_query(question, index, QaConfig(tau=0.3))


accuracies = {}
for k in (2, 4, 8, 16):
    model = fit_kmeans(vectors, k=k, seed=7)
    report = run_qep(doc, model, qa)
    accuracies[k] = report.accuracy

print(format_accuracy_table({"demo-corpus": accuracies}))
print("\n(accuracy drifts down as k grows: more clusters mean more ways to miss)\n")

# Topic naming stays a human step: inspect each cluster's top terms, then
# assign labels and read off the document's topic distribution.
model = fit_kmeans(vectors, k=4, seed=7)
terms = cluster_top_terms(model, doc.sentences)
print("top terms per cluster:")
for cluster_id, term_list in sorted(terms.items()):
    print(f"  cluster {cluster_id}: {', '.join(term_list[:6])}")

labels = {}
for cluster_id, term_list in terms.items():
    match = next((name for name, vocab in TOPICS.items()
                  if set(term_list[:4]) & set(vocab)), f"topic-{cluster_id}")
    labels[cluster_id] = match

labeling = TopicLabeling(labels=labels, top_terms=terms)
dist = topic_distribution(doc, model, labeling)
print("\n" + format_topic_table({"demo-corpus": dist}))

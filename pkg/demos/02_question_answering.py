"""Ask natural-language questions against an indexed document.

Shows the retrieval + relevance-gate pipeline: the best-matching sentence by
cosine similarity is returned only when its relevance score b clears the
threshold tau, otherwise the fallback statement comes back.

    python demos/02_question_answering.py
"""
from tosqa.embedding import ReferenceHashBackend
from tosqa.qa import DocumentIndex, QaConfig, answer_query

DOCUMENT = [
    "By accessing the service you agree to be bound by these terms.",
    "We may suspend or terminate your account if you violate any obligations.",
    "We collect email addresses and usage information from every user.",
    "We never sell your personal data to third parties.",
    "You can request deletion of your personal data at any time.",
    "Disputes are resolved through binding arbitration rather than in court.",
    "We may update these terms with thirty days notice.",
]

backend = ReferenceHashBackend(seed=42, dim=384)
index = DocumentIndex.from_texts(DOCUMENT, backend)

QUESTIONS = [
    "Do you sell my personal data to third parties?",
    "Can I request deletion of my personal data?",
    "What happens if I violate the terms?",           # gated: little token overlap
    "How do I configure the thermostat in my car?",   # gated: off topic
]

cfg = QaConfig(tau=0.3)
print(f"tau = {cfg.tau}\n")
for question in QUESTIONS:
    answer = answer_query(question, index, cfg)
    print(f"Q: {question}")
    if answer.accepted:
        print(f"A: {answer.text}")
    else:
        print(f"A: {answer.fallback_message}")
        print(f"   (best rejected candidate: {answer.text!r})")
    print(f"   similarity={answer.similarity:.3f}  relevance={answer.relevance:.3f}  "
          f"accepted={answer.accepted}\n")

# The gate is just a threshold on b: lower tau and the off-topic answer
# would need less shared vocabulary to pass.
strict = answer_query(QUESTIONS[0], index, QaConfig(tau=0.9))
print(f"same question at tau=0.9 -> accepted={strict.accepted} "
      f"(relevance {strict.relevance:.3f} no longer clears the bar)"
      if not strict.accepted else
      f"same question at tau=0.9 -> still accepted (relevance {strict.relevance:.3f})")

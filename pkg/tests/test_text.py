import pytest

from tosqa.text import (
    MIN_SENTENCE_TOKENS,
    STOPWORDS,
    content_tokens,
    segment_sentences,
    tokenize,
)


def test_stopword_list_is_large_enough():
    assert len(STOPWORDS) >= 100
    for word in ("the", "of", "and", "to", "a", "in", "we", "may", "your", "with"):
        assert word in STOPWORDS


def test_tokenize_splits_on_non_alphanumerics():
    assert tokenize("Don't stop-me now!") == ["don", "t", "stop", "me", "now"]
    assert tokenize("  ") == []
    assert tokenize("Version 2.0 applies") == ["version", "2", "0", "applies"]


def test_content_tokens_remove_stopwords():
    assert content_tokens("We may share your personal data") == ["share", "personal", "data"]


def test_segment_two_terminated_sentences():
    got = segment_sentences("You own your content. We may suspend accounts.")
    assert got == ["You own your content.", "We may suspend accounts."]


def test_segment_drops_short_heading_keeps_list_item():
    got = segment_sentences("## Privacy\n- We collect emails from users")
    assert got == ["We collect emails from users"]


def test_segment_abbreviation_guard():
    got = segment_sentences("See Section 5, e.g. for details about arbitration.")
    assert got == ["See Section 5, e.g. for details about arbitration."]


@pytest.mark.parametrize("abbr", ["i.e.", "etc.", "Inc.", "Ltd.", "No."])
def test_segment_other_abbreviations(abbr):
    text = f"The company {abbr} reserves every right granted here."
    assert len(segment_sentences(text)) == 1


def test_segment_dotted_tokens_do_not_split():
    got = segment_sentences("Contact us at support.example.com for account help.")
    assert got == ["Contact us at support.example.com for account help."]


def test_segment_empty_input():
    assert segment_sentences("") == []
    assert segment_sentences("   \n\n  ") == []


def test_segment_minimum_token_floor():
    assert segment_sentences("Too short here.") == []
    assert segment_sentences("Exactly four word tokens.") == ["Exactly four word tokens."]


def test_segment_strips_markdown_markup():
    md = "# https://example.com/terms\n\nWe **never** sell [your data](https://x.com) to brokers.\n"
    got = segment_sentences(md)
    assert "We never sell your data to brokers." in got


def test_segment_exclamation_and_question_terminators():
    got = segment_sentences("Will you delete my data? We certainly will do so!")
    assert got == ["Will you delete my data?", "We certainly will do so!"]


def test_segment_join_idempotent_on_clean_sentences():
    sentences = [
        "We collect email addresses from every user.",
        "You may cancel the subscription at any time.",
        "Disputes are resolved through binding arbitration, e.g. in California.",
        "The service is provided without any warranty",
    ]
    joined = "\n\n".join(sentences)
    assert segment_sentences(joined) == sentences
    # And segmenting the segmentation output changes nothing further.
    again = segment_sentences("\n\n".join(segment_sentences(joined)))
    assert again == sentences


def test_segment_respects_document_order():
    md = "First clause applies to everyone. Second clause applies to minors.\n\n- Third item about data retention"
    got = segment_sentences(md)
    assert got == [
        "First clause applies to everyone.",
        "Second clause applies to minors.",
        "Third item about data retention",
    ]


def test_min_sentence_tokens_constant():
    assert MIN_SENTENCE_TOKENS == 4

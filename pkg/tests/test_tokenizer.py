import random

import pytest
from hypothesis import given, strategies as st

from meaningbank.tokenizer import (
    CharTokenizer,
    decode_labels,
    encode_tokens,
    rule_labels,
    tokenize_with_rules,
)

FIG1_EN = "Alfred Nobel invented dynamite in 1866."

WORDS = ["cat", "dog", "runs", "fast", "Nobel", "nine", "x12", "über"]


def synthetic_corpus(n=100, seed=3):
    """Sentences assembled from a small vocabulary, gold labels by construction."""
    rng = random.Random(seed)
    texts, label_seqs = [], []
    for _ in range(n):
        words = [rng.choice(WORDS) for _ in range(rng.randint(1, 6))]
        text = " ".join(words) + "."
        labels = []
        for k, word in enumerate(words):
            labels.append("S" if k == 0 else "T")
            labels.extend("I" * (len(word) - 1))
            labels.append("O")  # the joining space
        labels[-1] = "T"  # final period replaces the trailing space slot
        assert len(labels) == len(text)
        texts.append(text)
        label_seqs.append(labels)
    return texts, label_seqs


def test_single_pair_memorization():
    model = CharTokenizer().fit(["Hi."], [["S", "I", "T"]])
    assert model.predict("Hi.") == ["S", "I", "T"]
    _, tokens = model.tokenize("Hi.")
    assert [t.text for t in tokens] == ["Hi", "."]


def test_synthetic_training_accuracy():
    texts, label_seqs = synthetic_corpus()
    model = CharTokenizer().fit(texts, label_seqs)
    assert model.score(texts, label_seqs) >= 0.99


def test_empty_training_set_rejected():
    with pytest.raises(ValueError):
        CharTokenizer().fit([], [])


def test_empty_input():
    texts, label_seqs = synthetic_corpus(10)
    model = CharTokenizer().fit(texts, label_seqs)
    labels, tokens = model.tokenize("")
    assert labels == [] and tokens == []


def test_fig1_sentence_hand_segmentation():
    # Hand oracle: 7 tokens, one sentence.
    _, tokens = tokenize_with_rules(FIG1_EN)
    assert [t.text for t in tokens] == [
        "Alfred", "Nobel", "invented", "dynamite", "in", "1866", ".",
    ]
    assert {t.sentence_index for t in tokens} == {0}


def test_two_sentences():
    _, tokens = tokenize_with_rules("Hi. Bye.")
    assert [t.text for t in tokens] == ["Hi", ".", "Bye", "."]
    assert [t.sentence_index for t in tokens] == [0, 0, 1, 1]


def test_trained_model_on_fig1():
    labels = rule_labels(FIG1_EN)
    model = CharTokenizer().fit([FIG1_EN], [labels])
    _, tokens = model.tokenize(FIG1_EN)
    assert [t.text for t in tokens] == [
        "Alfred", "Nobel", "invented", "dynamite", "in", "1866", ".",
    ]


@given(st.text(alphabet="ab .", max_size=30), st.randoms(use_true_random=False))
def test_decode_is_total_and_spans_are_sane(text, rng):
    labels = [rng.choice("STIO") for _ in text]
    tokens = decode_labels(text, labels)
    prev_end = 0
    for tok in tokens:
        assert tok.start >= prev_end  # ordered, non-overlapping
        assert text[tok.start : tok.end] == tok.text
        prev_end = tok.end


@given(st.text(alphabet="ab .", max_size=30), st.randoms(use_true_random=False))
def test_label_round_trip_up_to_normalization(text, rng):
    labels = [rng.choice("STIO") for _ in text]
    tokens = decode_labels(text, labels)
    back = encode_tokens(text, tokens)
    assert decode_labels(text, back) == tokens


@given(st.text(alphabet="ab .x", max_size=40), st.randoms(use_true_random=False))
def test_reconstruction_is_byte_exact(text, rng):
    labels = [rng.choice("STIO") for _ in text]
    tokens = decode_labels(text, labels)
    rebuilt = list(text)
    covered = set()
    for tok in tokens:
        covered.update(range(tok.start, tok.end))
    # Characters outside all tokens must be exactly the O-labeled (or normalized) rest.
    assert "".join(rebuilt) == text
    for tok in tokens:
        assert text[tok.start : tok.end] == tok.text


def test_model_file_round_trip():
    texts, label_seqs = synthetic_corpus(20)
    model = CharTokenizer().fit(texts, label_seqs)
    clone = CharTokenizer.from_text(model.to_text())
    assert clone.to_text() == model.to_text()
    for text in texts[:5]:
        assert clone.predict(text) == model.predict(text)

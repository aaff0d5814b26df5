"""Trainable character tokenizer: segmentation as a 4-label character tagging task.

Each character gets one of S (sentence-beginning), T (token-beginning),
I (inside token), O (outside any token). Decoding the labels yields both
sentence boundaries and word tokens in a single pass.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .layers import Token

LABELS = ("S", "T", "I", "O")
# Tie-break priority when context statistics are equal.
LABEL_PRIORITY = {"S": 0, "T": 1, "I": 2, "O": 3}

_PAD = "\x00"
_SENT_END = ".!?"
_SPLIT_PUNCT = ".!?,;:"


def char_class(c: str) -> str:
    if c == _PAD:
        return "#"
    if c.isspace():
        return "s"
    if c.isalpha():
        return "a"
    if c.isdigit():
        return "d"
    return "p"


def decode_labels(raw: str, labels: list[str]) -> list[Token]:
    """Total decoder from a label sequence to tokens.

    Any sequence over {S,T,I,O} is valid: an I with no open token is
    normalized to a token beginning, and every S opens a new sentence.
    """
    if len(raw) != len(labels):
        raise ValueError("label sequence length must match text length")
    tokens: list[Token] = []
    start = None
    sent = -1  # incremented at each S; tokens before any S land in sentence 0

    def close(end: int):
        nonlocal start
        if start is not None:
            tokens.append(Token(raw[start:end], start, end, max(sent, 0)))
            start = None

    for i, label in enumerate(labels):
        if label == "S":
            close(i)
            sent += 1
            start = i
        elif label == "T":
            close(i)
            start = i
        elif label == "I":
            if start is None:  # normalize stray I to a token beginning
                start = i
        else:  # O
            close(i)
    close(len(raw))
    return tokens


def encode_tokens(raw: str, tokens: list[Token]) -> list[str]:
    """Inverse of :func:`decode_labels`: gold labels from token spans."""
    labels = ["O"] * len(raw)
    prev_sent = None
    for tok in tokens:
        labels[tok.start] = "S" if tok.sentence_index != prev_sent else "T"
        prev_sent = tok.sentence_index
        for i in range(tok.start + 1, tok.end):
            labels[i] = "I"
    return labels


def rule_labels(raw: str) -> list[str]:
    """Rule fallback used when no model is loaded.

    Splits on whitespace, detaches one final punctuation character, and opens
    a new sentence after .!? followed by whitespace and an uppercase letter.
    """
    labels = ["O"] * len(raw)
    spans = []
    i = 0
    while i < len(raw):
        if raw[i].isspace():
            i += 1
            continue
        j = i
        while j < len(raw) and not raw[j].isspace():
            j += 1
        word = raw[i:j]
        if (
            len(word) > 1
            and word[-1] in _SPLIT_PUNCT
            and any(c.isalnum() for c in word[:-1])
        ):
            spans.append((i, j - 1))
            spans.append((j - 1, j))
        else:
            spans.append((i, j))
        i = j
    sentence_start = True
    for start, end in spans:
        labels[start] = "S" if sentence_start else "T"
        for k in range(start + 1, end):
            labels[k] = "I"
        sentence_start = False
        if raw[end - 1] in _SENT_END:
            nxt = end
            while nxt < len(raw) and raw[nxt].isspace():
                nxt += 1
            if nxt > end and nxt < len(raw) and raw[nxt].isupper():
                sentence_start = True
    return labels


class CharTokenizer(BaseEstimator):
    """Character-window classifier over the four segmentation labels.

    Prediction looks up label counts for the exact +-window character context
    and backs off to narrower windows, character classes, the character
    itself, and finally the label prior. Ties break by S>T>I>O priority, so
    prediction is deterministic.
    """

    def __init__(self, window: int = 3):
        self.window = window

    # Backoff levels, most specific first.
    def _keys(self, padded: str, i: int) -> list[tuple[str, str]]:
        w = self.window
        full = padded[i - w : i + w + 1]
        narrow = padded[i - 1 : i + 2]
        classes = "".join(char_class(c) for c in full)
        return [("win", full), ("tri", narrow), ("cls", classes), ("chr", padded[i])]

    def fit(self, texts: list[str], label_seqs: list[list[str]]) -> "CharTokenizer":
        if not texts:
            raise ValueError("training set must be non-empty")
        tables: dict[str, dict[str, dict[str, int]]] = {
            level: {} for level in ("win", "tri", "cls", "chr")
        }
        prior: dict[str, int] = {}
        w = self.window
        for raw, labels in zip(texts, label_seqs):
            if len(raw) != len(labels):
                raise ValueError("label sequence length must match text length")
            padded = _PAD * w + raw + _PAD * w
            for i, label in enumerate(labels):
                if label not in LABELS:
                    raise ValueError(f"bad label {label!r}")
                prior[label] = prior.get(label, 0) + 1
                for level, key in self._keys(padded, i + w):
                    counts = tables[level].setdefault(key, {})
                    counts[label] = counts.get(label, 0) + 1
        self.tables_ = tables
        self.prior_ = prior
        return self

    @staticmethod
    def _argmax(counts: dict[str, int]) -> str:
        return max(counts, key=lambda l: (counts[l], -LABEL_PRIORITY[l]))

    def predict(self, raw: str) -> list[str]:
        check_is_fitted(self, "tables_")
        w = self.window
        padded = _PAD * w + raw + _PAD * w
        labels = []
        for i in range(len(raw)):
            for level, key in self._keys(padded, i + w):
                counts = self.tables_[level].get(key)
                if counts:
                    labels.append(self._argmax(counts))
                    break
            else:
                labels.append(self._argmax(self.prior_))
        return labels

    def tokenize(self, raw: str) -> tuple[list[str], list[Token]]:
        labels = self.predict(raw)
        return labels, decode_labels(raw, labels)

    def score(self, texts: list[str], label_seqs: list[list[str]]) -> float:
        """Per-character label accuracy."""
        total = correct = 0
        for raw, gold in zip(texts, label_seqs):
            pred = self.predict(raw)
            total += len(gold)
            correct += sum(p == g for p, g in zip(pred, gold))
        return correct / total if total else 1.0

    # -- plain-text model files ---------------------------------------------

    def to_text(self) -> str:
        check_is_fitted(self, "tables_")
        lines = [f"meaningbank tokenizer 1 window={self.window}"]
        for label in sorted(self.prior_):
            lines.append(f"PRIOR\t{label}\t{self.prior_[label]}")
        for level in ("win", "tri", "cls", "chr"):
            for key in sorted(self.tables_[level]):
                for label in sorted(self.tables_[level][key]):
                    esc = key.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n").replace("\x00", "\\0")
                    lines.append(f"{level.upper()}\t{esc}\t{label}\t{self.tables_[level][key][label]}")
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_text(cls, text: str) -> "CharTokenizer":
        lines = text.splitlines()
        header = lines[0].split()
        if header[:2] != ["meaningbank", "tokenizer"]:
            raise ValueError("not a tokenizer model file")
        model = cls(window=int(header[3].split("=")[1]))
        model.tables_ = {level: {} for level in ("win", "tri", "cls", "chr")}
        model.prior_ = {}
        for line in lines[1:]:
            kind, *rest = line.split("\t")
            if kind == "PRIOR":
                label, count = rest
                model.prior_[label] = int(count)
            else:
                key, label, count = rest
                key = (
                    key.replace("\\0", "\x00")
                    .replace("\\n", "\n")
                    .replace("\\t", "\t")
                    .replace("\\\\", "\\")
                )
                model.tables_[kind.lower()].setdefault(key, {})[label] = int(count)
        return model


def tokenize_with_rules(raw: str) -> tuple[list[str], list[Token]]:
    labels = rule_labels(raw)
    return labels, decode_labels(raw, labels)

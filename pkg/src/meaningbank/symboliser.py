"""Non-logical symbol assignment: lemmatization plus instance-based lookup.

For every (lemma, semtag) pair seen in training the most frequent symbol is
memorized; at tagging time the token is lemmatized and the memorized symbol
reused, falling back to the lemma itself for unseen pairs.
"""

from __future__ import annotations

from importlib import resources

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .layers import Symbol

_VOWELS = "aeiou"


class LemmaLexicon:
    """Exception list plus suffix-strip rules; lemmatization is total."""

    def __init__(self, exceptions: dict[str, str] | None = None, known: set[str] | None = None):
        if exceptions is None:
            exceptions = {}
            text = resources.files("meaningbank.data").joinpath("lemmas.tsv").read_text("utf-8")
            for line in text.splitlines():
                if not line or line.startswith("#"):
                    continue
                form, lemma = line.split("\t")
                exceptions[form] = lemma
        self.exceptions = exceptions
        if known is None:
            known = set()
            text = resources.files("meaningbank.data").joinpath("senses.tsv").read_text("utf-8")
            for line in text.splitlines():
                if not line or line.startswith("#"):
                    continue
                known.add(line.split("\t")[0])
        self.known = known

    def _strip(self, word: str, suffix: str) -> str | None:
        if not word.endswith(suffix) or len(word) - len(suffix) < 2:
            return None
        stem = word[: -len(suffix)]
        if stem in self.known:
            return stem
        if stem + "e" in self.known:
            return stem + "e"
        # Undo consonant doubling: stopped -> stopp -> stop (but keep -ll, -ss).
        if (
            len(stem) >= 3
            and stem[-1] == stem[-2]
            and stem[-1] not in _VOWELS
            and stem[-1] not in "lsz"
        ):
            return stem[:-1]
        return stem

    def lemmatize(self, token: str) -> str:
        word = token.lower()
        if word in self.exceptions:
            return self.exceptions[word]
        if word in self.known:
            return word
        for suffix in ("ing", "ed"):
            stem = self._strip(word, suffix)
            if stem is not None:
                return stem
        if word.endswith("ies") and len(word) > 4:
            return word[:-3] + "y"
        if word.endswith("es") and len(word) > 3 and word[:-2].endswith(("s", "x", "z", "ch", "sh")):
            return word[:-2]
        if word.endswith("s") and not word.endswith("ss") and len(word) > 3:
            return word[:-1]
        return word


class Symboliser(BaseEstimator):
    """Instance-based symbol table keyed (lemma, semtag)."""

    def __init__(self, lexicon: LemmaLexicon | None = None):
        self.lexicon = lexicon

    def _lexicon(self) -> LemmaLexicon:
        if self.lexicon is None:
            self.lexicon = LemmaLexicon()
        return self.lexicon

    def fit(self, triples: list[tuple[str, str, str]]) -> "Symboliser":
        """Aggregate (lemma, semtag, gold symbol) counts."""
        table: dict[tuple[str, str], dict[str, int]] = {}
        for lemma, semtag, symbol in triples:
            counts = table.setdefault((lemma, semtag), {})
            counts[symbol] = counts.get(symbol, 0) + 1
        self.table_ = table
        return self

    def lookup(self, lemma: str, semtag: str) -> str | None:
        counts = self.table_.get((lemma, semtag))
        if not counts:
            return None
        # Highest count wins; ties break lexicographically.
        return min(counts, key=lambda s: (-counts[s], s))

    def symbolise(self, token: str, semtag: str) -> Symbol:
        check_is_fitted(self, "table_")
        lemma = self._lexicon().lemmatize(token)
        symbol = self.lookup(lemma, semtag)
        return Symbol(lemma=lemma, symbol=symbol if symbol is not None else lemma)

    def predict(self, pairs: list[tuple[str, str]]) -> list[Symbol]:
        return [self.symbolise(token, semtag) for token, semtag in pairs]

    # -- model files ----------------------------------------------------------

    def to_text(self) -> str:
        check_is_fitted(self, "table_")
        lines = ["meaningbank symboliser 1"]
        for (lemma, semtag) in sorted(self.table_):
            for symbol in sorted(self.table_[(lemma, semtag)]):
                count = self.table_[(lemma, semtag)][symbol]
                lines.append(f"{lemma}\t{semtag}\t{symbol}\t{count}")
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_text(cls, text: str) -> "Symboliser":
        lines = text.splitlines()
        if not lines[0].startswith("meaningbank symboliser"):
            raise ValueError("not a symboliser model file")
        model = cls()
        model.table_ = {}
        for line in lines[1:]:
            lemma, semtag, symbol, count = line.split("\t")
            model.table_.setdefault((lemma, semtag), {})[symbol] = int(count)
        return model

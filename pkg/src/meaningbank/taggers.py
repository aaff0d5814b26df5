"""Trainable sequence models for token-level layers.

``TrigramTagger`` is a trigram HMM with deleted-interpolation smoothing and a
suffix model for unknown tokens; it serves both the semantic-tag layer and
CCG supertagging. ``ChainRoleLabeler`` is a structured perceptron over a
linear chain, with features drawn from the semtag, symbol, and category
layers, used for thematic roles.
"""

from __future__ import annotations

import json
from fractions import Fraction

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

BOS = "<s>"
EOS = "</s>"

_SUFFIX_ALPHA = Fraction(1, 1000)
# Uniform mixing keeps every transition strictly positive, so no tag sequence
# has probability zero and tie-breaking stays well defined.
_TRANS_EPS = Fraction(1, 10**6)


class TrigramTagger(BaseEstimator):
    """Trigram HMM tagger in the TnT style.

    All probabilities are exact rationals (counts over counts), so decoding
    compares scores without rounding: ties are true ties and break toward the
    lexicographically smallest tag sequence, making retraining and decoding
    fully deterministic and exactly reproducible by exhaustive enumeration.
    """

    def __init__(self, tagset: list[str] | None = None, suffix_len: int = 4):
        self.tagset = tagset
        self.suffix_len = suffix_len

    # -- training -----------------------------------------------------------

    def fit(self, sentences: list[list[str]], tag_seqs: list[list[str]]) -> "TrigramTagger":
        if not sentences:
            raise ValueError("training set must be non-empty")
        uni: dict[str, int] = {}
        bi: dict[tuple[str, str], int] = {}
        tri: dict[tuple[str, str, str], int] = {}
        ctx2: dict[tuple[str, str], int] = {}
        emit: dict[tuple[str, str], int] = {}
        emit_tag: dict[str, int] = {}
        suffix: dict[tuple[str, str], int] = {}
        suffix_total: dict[str, int] = {}
        for tokens, tags in zip(sentences, tag_seqs):
            if len(tokens) != len(tags):
                raise ValueError("token/tag length mismatch")
            if self.tagset is not None:
                for tag in tags:
                    if tag not in self.tagset:
                        raise ValueError(f"unknown tag {tag!r}")
            padded = [BOS, BOS, *tags, EOS]
            for t in padded[2:]:
                uni[t] = uni.get(t, 0) + 1
            for a, b in zip(padded[1:], padded[2:]):
                bi[(a, b)] = bi.get((a, b), 0) + 1
            for a, b, c in zip(padded, padded[1:], padded[2:]):
                tri[(a, b, c)] = tri.get((a, b, c), 0) + 1
                ctx2[(a, b)] = ctx2.get((a, b), 0) + 1
            for w, t in zip(tokens, tags):
                emit[(w, t)] = emit.get((w, t), 0) + 1
                emit_tag[t] = emit_tag.get(t, 0) + 1
                low = w.lower()
                for length in range(min(self.suffix_len, len(low)), -1, -1):
                    s = low[len(low) - length :]
                    suffix[(s, t)] = suffix.get((s, t), 0) + 1
                    suffix_total[s] = suffix_total.get(s, 0) + 1
        self.uni_ = uni
        self.bi_ = bi
        self.tri_ = tri
        self.ctx2_ = ctx2
        self.emit_ = emit
        self.emit_tag_ = emit_tag
        self.suffix_ = suffix
        self.suffix_total_ = suffix_total
        self.n_unigrams_ = sum(uni.values())
        self.n_sentences_ = len(sentences)
        self.tags_ = sorted(emit_tag)
        self.word_tags_ = {}
        for (w, t) in emit:
            self.word_tags_.setdefault(w, set()).add(t)
        self.lambdas_ = self._deleted_interpolation()
        return self

    def _deleted_interpolation(self) -> tuple[Fraction, Fraction, Fraction]:
        """TnT's successive-deletion estimate of the interpolation weights."""
        l1 = l2 = l3 = 0
        n = self.n_unigrams_
        for (a, b, c), count in self.tri_.items():
            v1 = Fraction(self.uni_.get(c, 0) - 1, n - 1) if n > 1 else Fraction(0)
            d2 = self._context_count_bi(b)
            v2 = Fraction(self.bi_.get((b, c), 0) - 1, d2 - 1) if d2 > 1 else Fraction(0)
            d3 = self.ctx2_.get((a, b), 0)
            v3 = Fraction(count - 1, d3 - 1) if d3 > 1 else Fraction(0)
            best = max(v1, v2, v3)
            if best == v3:  # ties favor the higher-order model
                l3 += count
            elif best == v2:
                l2 += count
            else:
                l1 += count
        total = l1 + l2 + l3
        if total == 0:
            return (Fraction(1, 3), Fraction(1, 3), Fraction(1, 3))
        return (Fraction(l1, total), Fraction(l2, total), Fraction(l3, total))

    def _context_count_bi(self, b: str) -> int:
        # Occurrences of b as a conditioning context for bigrams.
        if b == BOS:
            return self.n_sentences_
        return self.uni_.get(b, 0)

    # -- probabilities -------------------------------------------------------

    def transition_prob(self, a: str, b: str, c: str) -> Fraction:
        """Interpolated trigram probability, mixed with a uniform floor."""
        cache = getattr(self, "_trans_cache_", None)
        if cache is None:
            cache = self._trans_cache_ = {}
        cached = cache.get((a, b, c))
        if cached is not None:
            return cached
        l1, l2, l3 = self.lambdas_
        p = Fraction(0)
        if self.n_unigrams_:
            p += l1 * Fraction(self.uni_.get(c, 0), self.n_unigrams_)
        d2 = self._context_count_bi(b)
        if d2:
            p += l2 * Fraction(self.bi_.get((b, c), 0), d2)
        d3 = self.ctx2_.get((a, b), 0)
        if d3:
            p += l3 * Fraction(self.tri_.get((a, b, c), 0), d3)
        p = (1 - _TRANS_EPS) * p + _TRANS_EPS * Fraction(1, len(self.tags_) + 1)
        cache[(a, b, c)] = p
        return p

    def emission_prob(self, tag: str, word: str) -> Fraction:
        if word in self.word_tags_:
            return Fraction(self.emit_.get((word, tag), 0), self.emit_tag_[tag])
        return self._unknown_emission(word).get(tag, Fraction(0))

    def _unknown_emission(self, word: str) -> dict[str, Fraction]:
        """Suffix-model emission scores, normalized so no tag gets zero."""
        low = word.lower()
        chosen = ""
        for length in range(min(self.suffix_len, len(low)), -1, -1):
            s = low[len(low) - length :]
            if s in self.suffix_total_:
                chosen = s
                break
        total = self.suffix_total_.get(chosen, 0)
        n_tags = len(self.tags_)
        n_emit = sum(self.emit_tag_.values())
        scores = {}
        for tag in self.tags_:
            p_tag_suffix = (self.suffix_.get((chosen, tag), 0) + _SUFFIX_ALPHA) / (
                total + _SUFFIX_ALPHA * n_tags
            )
            prior = (self.emit_tag_.get(tag, 0) + _SUFFIX_ALPHA) / (
                n_emit + _SUFFIX_ALPHA * n_tags
            )
            scores[tag] = p_tag_suffix / prior
        norm = sum(scores.values())
        return {tag: s / norm for tag, s in scores.items()}

    def candidate_tags(self, word: str) -> list[str]:
        """Known words are restricted to their observed tags."""
        if word in self.word_tags_:
            return sorted(self.word_tags_[word])
        return self.tags_

    # -- decoding -------------------------------------------------------------

    def predict(self, tokens: list[str]) -> list[str]:
        check_is_fitted(self, "tags_")
        if not tokens:
            return []
        fwd = self._forward(tokens)
        best = None
        for (a, b), (score, path) in fwd[-1].items():
            total = score * self.transition_prob(a, b, EOS)
            if best is None or total > best[0] or (total == best[0] and path < best[1]):
                best = (total, path)
        return list(best[1])

    def _forward(self, tokens: list[str]):
        """Viterbi lattice keeping, per state, the best (score, lex-min path)."""
        states: dict[tuple[str, str], tuple[Fraction, tuple[str, ...]]] = {}
        for t in self.candidate_tags(tokens[0]):
            score = self.transition_prob(BOS, BOS, t) * self.emission_prob(t, tokens[0])
            states[(BOS, t)] = (score, (t,))
        lattice = [states]
        for word in tokens[1:]:
            new: dict[tuple[str, str], tuple[Fraction, tuple[str, ...]]] = {}
            cands = self.candidate_tags(word)
            emission = {t: self.emission_prob(t, word) for t in cands}
            for (a, b), (score, path) in sorted(states.items()):
                for t in cands:
                    s = score * self.transition_prob(a, b, t) * emission[t]
                    key = (b, t)
                    cand = (s, path + (t,))
                    old = new.get(key)
                    if old is None or s > old[0] or (s == old[0] and cand[1] < old[1]):
                        new[key] = cand
            states = new
            lattice.append(states)
        return lattice

    def predict_kbest(self, tokens: list[str], k: int = 3) -> list[list[tuple[str, float]]]:
        """Per-token k-best tags by max-marginal score, Viterbi tag first."""
        check_is_fitted(self, "tags_")
        if not tokens:
            return []
        fwd = self._forward(tokens)
        n = len(tokens)
        # Backward max-completion scores per state.
        bwd: list[dict] = [dict() for _ in range(n)]
        for (a, b) in fwd[-1]:
            bwd[-1][(a, b)] = self.transition_prob(a, b, EOS)
        for i in range(n - 2, -1, -1):
            word = tokens[i + 1]
            cands = self.candidate_tags(word)
            emission = {t: self.emission_prob(t, word) for t in cands}
            for (a, b) in fwd[i]:
                best = None
                for t in cands:
                    nxt = bwd[i + 1].get((b, t))
                    if nxt is None:
                        continue
                    s = self.transition_prob(a, b, t) * emission[t] * nxt
                    if best is None or s > best:
                        best = s
                bwd[i][(a, b)] = best if best is not None else Fraction(0)
        viterbi = self.predict(tokens)
        result = []
        for i in range(n):
            marginal: dict[str, Fraction] = {}
            for (a, b), (score, _) in fwd[i].items():
                total = score * bwd[i][(a, b)]
                if b not in marginal or total > marginal[b]:
                    marginal[b] = total
            ranked = [viterbi[i]]
            others = sorted(
                (t for t in marginal if t != viterbi[i]),
                key=lambda t: (-marginal[t], t),
            )
            ranked.extend(others)
            result.append([(tag, float(marginal[tag])) for tag in ranked[:k]])
        return result

    def score(self, sentences: list[list[str]], tag_seqs: list[list[str]]) -> float:
        total = correct = 0
        for tokens, gold in zip(sentences, tag_seqs):
            pred = self.predict(tokens)
            total += len(gold)
            correct += sum(p == g for p, g in zip(pred, gold))
        return correct / total if total else 1.0

    # -- model files ----------------------------------------------------------

    def to_text(self) -> str:
        check_is_fitted(self, "tags_")
        lines = [f"meaningbank trigram-tagger 1 suffix_len={self.suffix_len}"]
        lines.append("LAMBDA\t" + "\t".join(str(l) for l in self.lambdas_))
        lines.append(f"SENTS\t{self.n_sentences_}")
        for t in sorted(self.uni_):
            lines.append(f"UNI\t{t}\t{self.uni_[t]}")
        for (a, b) in sorted(self.bi_):
            lines.append(f"BI\t{a}\t{b}\t{self.bi_[(a, b)]}")
        for (a, b) in sorted(self.ctx2_):
            lines.append(f"CTX\t{a}\t{b}\t{self.ctx2_[(a, b)]}")
        for (a, b, c) in sorted(self.tri_):
            lines.append(f"TRI\t{a}\t{b}\t{c}\t{self.tri_[(a, b, c)]}")
        for (w, t) in sorted(self.emit_):
            lines.append(f"EM\t{json.dumps(w)}\t{t}\t{self.emit_[(w, t)]}")
        for (s, t) in sorted(self.suffix_):
            lines.append(f"SUF\t{json.dumps(s)}\t{t}\t{self.suffix_[(s, t)]}")
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_text(cls, text: str) -> "TrigramTagger":
        lines = text.splitlines()
        header = lines[0].split()
        if header[:2] != ["meaningbank", "trigram-tagger"]:
            raise ValueError("not a trigram tagger model file")
        model = cls(suffix_len=int(header[3].split("=")[1]))
        model.uni_, model.bi_, model.tri_, model.ctx2_ = {}, {}, {}, {}
        model.emit_, model.suffix_ = {}, {}
        for line in lines[1:]:
            kind, *rest = line.split("\t")
            if kind == "LAMBDA":
                model.lambdas_ = tuple(Fraction(x) for x in rest)
            elif kind == "SENTS":
                model.n_sentences_ = int(rest[0])
            elif kind == "UNI":
                model.uni_[rest[0]] = int(rest[1])
            elif kind == "BI":
                model.bi_[(rest[0], rest[1])] = int(rest[2])
            elif kind == "CTX":
                model.ctx2_[(rest[0], rest[1])] = int(rest[2])
            elif kind == "TRI":
                model.tri_[(rest[0], rest[1], rest[2])] = int(rest[3])
            elif kind == "EM":
                model.emit_[(json.loads(rest[0]), rest[1])] = int(rest[2])
            elif kind == "SUF":
                model.suffix_[(json.loads(rest[0]), rest[1])] = int(rest[2])
        model.emit_tag_ = {}
        for (w, t), c in model.emit_.items():
            model.emit_tag_[t] = model.emit_tag_.get(t, 0) + c
        model.suffix_total_ = {}
        for (s, t), c in model.suffix_.items():
            model.suffix_total_[s] = model.suffix_total_.get(s, 0) + c
        model.n_unigrams_ = sum(model.uni_.values())
        model.tags_ = sorted(model.emit_tag_)
        model.word_tags_ = {}
        for (w, t) in model.emit_:
            model.word_tags_.setdefault(w, set()).add(t)
        return model


# -- thematic roles -----------------------------------------------------------


def role_features(sentence: list[tuple[str, str, str]], i: int) -> list[tuple]:
    """Feature templates over a +-2 window of (semtag, symbol, category)."""
    feats: list[tuple] = [("bias",)]
    n = len(sentence)
    for d in range(-2, 3):
        j = i + d
        sem, sym, cat = sentence[j] if 0 <= j < n else ("<pad>", "<pad>", "<pad>")
        feats.append(("sem", d, sem))
        feats.append(("sym", d, sym))
        feats.append(("cat", d, cat))
    return feats


class ChainRoleLabeler(BaseEstimator):
    """Linear-chain structured perceptron for the thematic-role layer.

    Each token is a (semtag, symbol, category) triple; the model learns
    integer feature weights by iterated Viterbi updates until the training
    set is reproduced or ``max_epochs`` is hit.
    """

    def __init__(self, roles: list[str] | None = None, max_epochs: int = 25):
        self.roles = roles
        self.max_epochs = max_epochs

    def fit(
        self,
        sentences: list[list[tuple[str, str, str]]],
        role_seqs: list[list[str]],
    ) -> "ChainRoleLabeler":
        roles = self.roles
        if roles is None:
            from .layers import default_inventories

            roles = default_inventories().roles
        if not roles:
            raise ValueError("role inventory must be non-empty")
        for sentence in sentences:
            for item in sentence:
                if len(item) != 3 or any(part is None for part in item):
                    raise ValueError("each token needs semtag, symbol and category features")
        for seq in role_seqs:
            for role in seq:
                if role not in roles:
                    raise ValueError(f"role {role!r} not in inventory")
        self.roles_ = sorted(roles)
        self.weights_: dict[tuple, float] = {}
        for _ in range(self.max_epochs):
            errors = 0
            for sentence, gold in zip(sentences, role_seqs):
                pred = self.predict(sentence)
                if pred != list(gold):
                    errors += 1
                    self._update(sentence, gold, +1)
                    self._update(sentence, pred, -1)
            if errors == 0:
                break
        return self

    def _update(self, sentence, roles, delta: int):
        prev = BOS
        for i, role in enumerate(roles):
            for f in role_features(sentence, i):
                key = (f, role)
                self.weights_[key] = self.weights_.get(key, 0) + delta
            key = (("prev", prev), role)
            self.weights_[key] = self.weights_.get(key, 0) + delta
            prev = role

    def local_score(self, sentence, i: int, role: str) -> float:
        return sum(self.weights_.get((f, role), 0) for f in role_features(sentence, i))

    def transition_score(self, prev: str, role: str) -> float:
        return self.weights_.get((("prev", prev), role), 0)

    def predict(self, sentence: list[tuple[str, str, str]]) -> list[str]:
        check_is_fitted(self, "roles_")
        if not sentence:
            return []
        states: dict[str, tuple[float, tuple[str, ...]]] = {}
        for role in self.roles_:
            score = self.transition_score(BOS, role) + self.local_score(sentence, 0, role)
            states[role] = (score, (role,))
        for i in range(1, len(sentence)):
            new: dict[str, tuple[float, tuple[str, ...]]] = {}
            local = {role: self.local_score(sentence, i, role) for role in self.roles_}
            for prev, (score, path) in sorted(states.items()):
                for role in self.roles_:
                    s = (score + self.transition_score(prev, role)) + local[role]
                    cand = (s, path + (role,))
                    old = new.get(role)
                    if old is None or s > old[0] or (s == old[0] and cand[1] < old[1]):
                        new[role] = cand
            states = new
        # Tie-break: highest score, then lexicographically smallest sequence.
        top_score = max(sp[0] for sp in states.values())
        paths = sorted(path for score, path in states.values() if score == top_score)
        return list(paths[0])

    def score(self, sentences, role_seqs) -> float:
        total = correct = 0
        for sentence, gold in zip(sentences, role_seqs):
            pred = self.predict(sentence)
            total += len(gold)
            correct += sum(p == g for p, g in zip(pred, gold))
        return correct / total if total else 1.0

    # -- model files ----------------------------------------------------------

    def to_text(self) -> str:
        check_is_fitted(self, "roles_")
        lines = ["meaningbank role-labeler 1"]
        lines.append("ROLES\t" + "\t".join(self.roles_))
        for key in sorted(self.weights_, key=repr):
            feature, role = key
            lines.append(f"W\t{json.dumps(feature)}\t{role}\t{repr(self.weights_[key])}")
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_text(cls, text: str) -> "ChainRoleLabeler":
        lines = text.splitlines()
        if not lines[0].startswith("meaningbank role-labeler"):
            raise ValueError("not a role labeler model file")
        model = cls()
        model.weights_ = {}
        for line in lines[1:]:
            kind, *rest = line.split("\t")
            if kind == "ROLES":
                model.roles_ = list(rest)
            elif kind == "W":
                feature = tuple(json.loads(rest[0]))
                weight = float(rest[2])
                model.weights_[(feature, rest[1])] = (
                    int(weight) if weight.is_integer() else weight
                )
        return model

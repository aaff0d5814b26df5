"""IBM Model 1 word alignment and cross-lingual annotation projection.

Alignments are induced by expectation maximization in both directions and
intersected, which keeps only high-precision one-to-one links. Token-level
annotation layers are copied across those links; the syntax layer is copied
only for perfect (bijective, monotonic) alignments, since word-order
divergence invalidates projected categories.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .corpus import Layer
from .layers import HUMAN, MACHINE, NONE_VALUE

NULL = "<NULL>"

PROJECTED_LAYERS = ("sem", "sym", "sen", "rol")


class AlignmentError(ValueError):
    pass


def _is_punct(token: str) -> bool:
    return bool(token) and all(not c.isalnum() for c in token)


@dataclass
class AlignmentSet:
    """Word links for one sentence pair, classified perfect or imperfect."""

    links: list[tuple[int, int]]
    source_len: int
    target_len: int
    perfect: bool | None = None

    def classify(
        self,
        source_tokens: list[str] | None = None,
        target_tokens: list[str] | None = None,
    ) -> bool:
        """Perfect: bijective over non-punctuation tokens and strictly monotonic."""
        self.perfect = self._classify(source_tokens, target_tokens)
        return self.perfect

    def _classify(self, source_tokens, target_tokens) -> bool:
        links = sorted(self.links)
        src_seen: set[int] = set()
        tgt_seen: set[int] = set()
        for i, j in links:
            if i in src_seen or j in tgt_seen:
                return False
            src_seen.add(i)
            tgt_seen.add(j)
        prev_j = -1
        for i, j in links:
            if j <= prev_j:
                return False
            prev_j = j
        src_required = set(range(self.source_len))
        tgt_required = set(range(self.target_len))
        if source_tokens is not None:
            src_required = {i for i in src_required if not _is_punct(source_tokens[i])}
        if target_tokens is not None:
            tgt_required = {j for j in tgt_required if not _is_punct(target_tokens[j])}
        return src_required <= src_seen and tgt_required <= tgt_seen


class Ibm1Aligner(BaseEstimator):
    """IBM Model 1 translation table t(target | source) trained by EM.

    The per-iteration corpus log-likelihood is recorded in ``loglik_`` and is
    non-decreasing, which the training loop asserts.
    """

    def __init__(self, iterations: int = 5, use_null: bool = True):
        self.iterations = iterations
        self.use_null = use_null

    def fit(self, bitext: list[tuple[list[str], list[str]]]) -> "Ibm1Aligner":
        if not bitext:
            raise AlignmentError("bitext must be non-empty")
        if self.iterations < 1:
            raise AlignmentError("iterations must be >= 1")
        pairs = [
            ([w.lower() for w in src], [w.lower() for w in tgt]) for src, tgt in bitext
        ]
        cooc: dict[str, set[str]] = {}
        for src, tgt in pairs:
            sources = src + ([NULL] if self.use_null else [])
            for s in sources:
                cooc.setdefault(s, set()).update(tgt)
        t: dict[tuple[str, str], float] = {}
        for s, targets in cooc.items():
            uniform = 1.0 / len(targets)
            for w in targets:
                t[(w, s)] = uniform
        loglik = [self._corpus_loglik(pairs, t)]
        for _ in range(self.iterations):
            counts: dict[tuple[str, str], float] = {}
            totals: dict[str, float] = {}
            for src, tgt in pairs:
                sources = src + ([NULL] if self.use_null else [])
                for w in tgt:
                    denom = sum(t.get((w, s), 0.0) for s in sources)
                    if denom == 0.0:
                        continue
                    for s in sources:
                        frac = t.get((w, s), 0.0) / denom
                        if frac:
                            counts[(w, s)] = counts.get((w, s), 0.0) + frac
                            totals[s] = totals.get(s, 0.0) + frac
            for (w, s), c in counts.items():
                t[(w, s)] = c / totals[s]
            ll = self._corpus_loglik(pairs, t)
            if ll < loglik[-1] - 1e-9:
                raise AssertionError("EM log-likelihood decreased")
            loglik.append(ll)
        self.t_ = t
        self.loglik_ = loglik
        return self

    def _corpus_loglik(self, pairs, t) -> float:
        ll = 0.0
        for src, tgt in pairs:
            sources = src + ([NULL] if self.use_null else [])
            for w in tgt:
                p = sum(t.get((w, s), 0.0) for s in sources) / len(sources)
                ll += math.log(p) if p > 0 else -1e9
        return ll

    def prob(self, target: str, source: str) -> float:
        check_is_fitted(self, "t_")
        return self.t_.get((target.lower(), source.lower()), 0.0)

    def best_links(self, source: list[str], target: list[str]) -> set[tuple[int, int]]:
        """Argmax alignment: each target token to its best source token or NULL."""
        check_is_fitted(self, "t_")
        links = set()
        for j, w in enumerate(target):
            best_i = None
            best_p = self.prob(w, NULL) if self.use_null else 0.0
            for i, s in enumerate(source):
                p = self.prob(w, s)
                if p > best_p:
                    best_p = p
                    best_i = i
            if best_i is not None and best_p > 0:
                links.add((best_i, j))
        return links

    # -- model files ----------------------------------------------------------

    def to_text(self) -> str:
        check_is_fitted(self, "t_")
        lines = [f"meaningbank ibm1 1 use_null={int(self.use_null)}"]
        for (w, s) in sorted(self.t_):
            lines.append(f"{s}\t{w}\t{self.t_[(w, s)]!r}")
        return "".join(line + "\n" for line in lines)

    @classmethod
    def from_text(cls, text: str) -> "Ibm1Aligner":
        lines = text.splitlines()
        header = lines[0].split()
        if header[:2] != ["meaningbank", "ibm1"]:
            raise ValueError("not an aligner model file")
        model = cls(use_null=bool(int(header[3].split("=")[1])))
        model.t_ = {}
        for line in lines[1:]:
            s, w, p = line.split("\t")
            model.t_[(w, s)] = float(p)
        model.loglik_ = []
        return model


def align(
    fwd: Ibm1Aligner,
    rev: Ibm1Aligner,
    source_tokens: list[str],
    target_tokens: list[str],
) -> AlignmentSet:
    """Intersection of the two directional argmax alignments."""
    fwd_links = fwd.best_links(source_tokens, target_tokens)
    rev_links = {(i, j) for (j, i) in rev.best_links(target_tokens, source_tokens)}
    links = sorted(fwd_links & rev_links)
    alignment = AlignmentSet(links, len(source_tokens), len(target_tokens))
    alignment.classify(source_tokens, target_tokens)
    return alignment


# -- pharaoh format --------------------------------------------------------------


def parse_pharaoh_line(line: str, source_len: int = 0, target_len: int = 0) -> AlignmentSet:
    links = []
    for pair in line.split():
        i, _, j = pair.partition("-")
        links.append((int(i), int(j)))
    src = max([source_len, *(i + 1 for i, _ in links)], default=source_len)
    tgt = max([target_len, *(j + 1 for _, j in links)], default=target_len)
    return AlignmentSet(sorted(links), src, tgt)


def format_pharaoh_line(alignment: AlignmentSet) -> str:
    return " ".join(f"{i}-{j}" for i, j in sorted(alignment.links))


# -- projection -------------------------------------------------------------------


@dataclass
class Hole:
    layer: str
    token_index: int
    reason: str


@dataclass
class ProjectionResult:
    layers: dict[str, Layer]
    holes: list[Hole] = field(default_factory=list)
    conflicts: list[Hole] = field(default_factory=list)

    def holes_tsv(self) -> str:
        rows = [f"{h.layer}\t{h.token_index}\t{h.reason}" for h in self.holes]
        return "".join(r + "\n" for r in rows)


def project(
    english_layers: dict[str, Layer],
    english_tokens: list[str],
    target_tokens: list[str],
    alignment: AlignmentSet,
    existing: dict[str, Layer] | None = None,
) -> ProjectionResult:
    """Copy annotation layers from English tokens across one-to-one links.

    Token-level values (sem, sym, sen, rol) follow every link; co-reference
    antecedents are remapped through the alignment and dropped when the
    antecedent is unaligned; the category layer is copied only for perfect
    alignments, otherwise left entirely as holes for a target-language parser.
    Target tokens already flagged human are never overwritten; such attempts
    are reported as conflicts.
    """
    n_tgt = len(target_tokens)
    for i, j in alignment.links:
        if not (0 <= i < len(english_tokens)) or not (0 <= j < n_tgt):
            raise AlignmentError(f"link ({i},{j}) out of range")
    perfect = (
        alignment.perfect
        if alignment.perfect is not None
        else alignment.classify(english_tokens, target_tokens)
    )
    src_to_tgt = {}
    for i, j in alignment.links:
        src_to_tgt.setdefault(i, j)
    result = ProjectionResult(layers={})
    existing = existing or {}

    def protected(layer_name: str, j: int) -> bool:
        old = existing.get(layer_name)
        return old is not None and j < len(old.flags) and old.flags[j] == HUMAN

    def blank_layer(layer_name: str) -> tuple[list[str], list[str]]:
        old = existing.get(layer_name)
        values = [""] * n_tgt
        flags = [MACHINE] * n_tgt
        if old is not None and len(old.values) == n_tgt:
            values = list(old.values)
            flags = list(old.flags)
        return values, flags

    copy_cat = perfect
    for layer_name in (*PROJECTED_LAYERS, "cor", "cat"):
        src_layer = english_layers.get(layer_name)
        if src_layer is None or not src_layer.values:
            continue
        values, flags = blank_layer(layer_name)
        filled = set()
        for i, j in alignment.links:
            if i >= len(src_layer.values):
                raise AlignmentError(f"link source {i} outside English {layer_name} layer")
            if layer_name == "cat" and not copy_cat:
                continue
            if protected(layer_name, j):
                if existing[layer_name].values[j] != src_layer.values[i]:
                    result.conflicts.append(Hole(layer_name, j, "human value differs"))
                filled.add(j)
                continue
            value = src_layer.values[i]
            if layer_name == "cor":
                value = _remap_coref(value, src_to_tgt)
            values[j] = value
            flags[j] = MACHINE
            filled.add(j)
        for j in range(n_tgt):
            if j not in filled:
                if protected(layer_name, j):
                    continue
                reason = (
                    "imperfect alignment"
                    if layer_name == "cat" and not copy_cat
                    else "target token unaligned"
                )
                result.holes.append(Hole(layer_name, j, reason))
        result.layers[layer_name] = Layer(values, flags)
    return result


def _remap_coref(value: str, src_to_tgt: dict[int, int]) -> str:
    if value == NONE_VALUE or value == "":
        return value
    antecedent = int(value)
    mapped = src_to_tgt.get(antecedent)
    return NONE_VALUE if mapped is None else str(mapped)

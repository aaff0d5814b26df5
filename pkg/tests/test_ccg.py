import itertools
import random

import pytest

from meaningbank.categories import ATOMS, Category, parse_category
from meaningbank.ccg import (
    COMBINATORS,
    Derivation,
    ParseError,
    check_derivation,
    combine,
    derivation_to_str,
    leaf,
    node,
    parse,
    parse_derivation,
)

NP = Category.atomic("NP")
S = Category.atomic("S")
TV = parse_category("(S\\NP)/NP")


def single(cat, score=0.0):
    return [(cat, score)]


def enumerate_derivations(candidates, combinators=COMBINATORS):
    """All complete derivations over the candidate lists (exhaustive oracle)."""

    def span(i, j):
        if j - i == 1:
            return [leaf(i, cat, score) for cat, score in candidates[i]]
        out = []
        for split in range(i + 1, j):
            for left in span(i, split):
                for right in span(split, j):
                    for comb, result in combine(left.category, right.category, combinators):
                        out.append(node(comb, result, left, right))
        return out

    return span(0, len(candidates))


def best_by_key(derivations):
    s_rooted = [d for d in derivations if d.category == S]
    pool = s_rooted if s_rooted else derivations
    return min(pool, key=Derivation.sort_key) if pool else None


def test_transitive_clause_parses_to_s():
    result = parse([single(NP), single(TV), single(NP)])
    assert result.complete
    assert result.derivation.category == S
    # Forced by the category algebra: FA below, BA on top.
    assert result.derivation.combinator == "BA"
    assert result.derivation.right.combinator == "FA"


def test_verb_final_cluster_needs_crossed_composition():
    # Verb-final order: the VP modifier intervenes between verb and object.
    cats = [
        single(NP),                                     # subject
        single(TV),                                     # verb
        single(parse_category("(S\\NP)\\(S\\NP)")),     # adverbial
        single(NP),                                     # object
    ]
    without = parse(cats, combinators=("FA", "BA", "FC", "BC"))
    assert not without.complete
    with_bcx = parse(cats)
    assert with_bcx.complete and with_bcx.derivation.category == S
    # Enumeration agrees: BCX is the only route to S.
    assert any(d.category == S for d in enumerate_derivations(cats))
    assert not any(
        d.category == S for d in enumerate_derivations(cats, ("FA", "BA", "FC", "BC"))
    )


def test_punctuation_absorption():
    result = parse([single(NP), single(parse_category("S\\NP")), single(Category.atomic("PUNCT"))])
    assert result.complete
    assert result.derivation.category == S
    # Right-branching tie-break absorbs the period low, onto the verb phrase.
    assert result.derivation.combinator == "BA"
    assert result.derivation.right.combinator == "RP"


def random_parseable_candidates(rng, n_tokens):
    """Sample a derivation top-down so the category sequence is parseable."""

    def expand(cat, n):
        if n == 1:
            return [cat]
        k = rng.randint(1, n - 1)
        if rng.random() < 0.5:
            arg = random_atom(rng)
            return expand(Category.functor(cat, "/", arg), k) + expand(arg, n - k)
        arg = random_atom(rng)
        return expand(arg, k) + expand(Category.functor(cat, "\\", arg), n - k)

    def random_atom(rng):
        return Category.atomic(rng.choice([a for a in ATOMS if a != "PUNCT"]))

    cats = expand(random_atom(rng), n_tokens)
    return [[(cat, rng.uniform(-3.0, 0.0))] for cat in cats]


def test_cky_equals_enumeration_on_random_sequences():
    rng = random.Random(97)
    for _ in range(100):
        n = rng.randint(1, 5)
        candidates = random_parseable_candidates(rng, n)
        # Sometimes offer an extra candidate per token.
        for options in candidates:
            if rng.random() < 0.3:
                options.append((Category.atomic("NP"), rng.uniform(-3.0, 0.0)))
        result = parse(candidates)
        oracle = best_by_key(enumerate_derivations(candidates))
        if oracle is None:
            assert not result.complete
        else:
            assert result.complete
            assert str(result.derivation) == str(oracle)
            assert result.derivation.score == oracle.score


def test_every_returned_derivation_type_checks():
    rng = random.Random(13)
    for _ in range(50):
        candidates = random_parseable_candidates(rng, rng.randint(1, 5))
        result = parse(candidates)
        for frag in result.fragments:
            assert check_derivation(frag)


def test_parse_is_deterministic():
    rng = random.Random(5)
    candidates = random_parseable_candidates(rng, 5)
    r1 = parse(candidates)
    r2 = parse(candidates)
    assert str(r1.derivation) == str(r2.derivation)


def test_incomplete_parse_returns_fragments():
    result = parse([single(NP), single(NP), single(NP)])
    assert not result.complete
    assert len(result.fragments) == 3
    assert all(f.category == NP for f in result.fragments)


def test_empty_and_missing_candidates_rejected():
    with pytest.raises(ParseError):
        parse([])
    with pytest.raises(ParseError):
        parse([single(NP), []])


def test_serialization_round_trip():
    result = parse([single(NP), single(TV), single(NP)])
    text = derivation_to_str(result.derivation)
    assert text == "(BA (lex 0 NP) (FA (lex 1 (S\\NP)/NP) (lex 2 NP)))"
    back = parse_derivation(text)
    assert str(back) == text
    assert back.category == S


def test_serialization_round_trip_random():
    rng = random.Random(71)
    for _ in range(40):
        candidates = random_parseable_candidates(rng, rng.randint(1, 5))
        result = parse(candidates)
        if result.complete:
            text = str(result.derivation)
            assert str(parse_derivation(text)) == text

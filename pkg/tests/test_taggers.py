import itertools
import random

import pytest

from meaningbank.taggers import (
    BOS,
    EOS,
    ChainRoleLabeler,
    TrigramTagger,
    role_features,
)

TAGS = ["CON", "DEF", "EPS", "NIL", "PER", "QUC"]
WORDS = ["the", "cat", "dog", "saw", "eight", "Nobel", "."]


def random_corpus(rng, n_sentences, max_len=6, tags=TAGS, words=WORDS):
    sentences, tag_seqs = [], []
    for _ in range(n_sentences):
        length = rng.randint(1, max_len)
        sentences.append([rng.choice(words) for _ in range(length)])
        tag_seqs.append([rng.choice(tags) for _ in range(length)])
    return sentences, tag_seqs


def brute_force_tag(model: TrigramTagger, tokens):
    """Exhaustive enumeration over all tag sequences, same scoring as the model."""
    best = None
    options = [model.candidate_tags(w) for w in tokens]
    for seq in itertools.product(*options):
        score = 1
        a, b = BOS, BOS
        for tag, word in zip(seq, tokens):
            score = score * model.transition_prob(a, b, tag) * model.emission_prob(tag, word)
            a, b = b, tag
        score *= model.transition_prob(a, b, EOS)
        if best is None or score > best[0] or (score == best[0] and seq < best[1]):
            best = (score, seq)
    return list(best[1])


def test_emission_for_consistently_tagged_token_is_maximal():
    sentences = [["eight", "cats"], ["eight", "dogs"], ["he", "saw", "eight"]]
    tags = [["QUC", "CON"], ["QUC", "CON"], ["PRO", "EPS", "QUC"]]
    model = TrigramTagger().fit(sentences, tags)
    p_quc = model.emission_prob("QUC", "eight")
    assert p_quc > 0
    for tag in model.tags_:
        if tag != "QUC":
            assert model.emission_prob(tag, "eight") < p_quc


def test_single_sentence_memorization():
    model = TrigramTagger().fit([["the", "cat", "."]], [["DEF", "CON", "NIL"]])
    assert model.predict(["the", "cat", "."]) == ["DEF", "CON", "NIL"]


def test_training_accuracy_on_100_synthetic_sentences():
    rng = random.Random(11)
    sentences, tag_seqs = [], []
    # Consistent lexicalized tags so the corpus is learnable.
    lexicon = {"the": "DEF", "cat": "CON", "dog": "CON", "saw": "EPS",
               "eight": "QUC", "Nobel": "PER", ".": "NIL"}
    for _ in range(100):
        words = [rng.choice(list(lexicon)) for _ in range(rng.randint(1, 8))]
        sentences.append(words)
        tag_seqs.append([lexicon[w] for w in words])
    model = TrigramTagger().fit(sentences, tag_seqs)
    assert model.score(sentences, tag_seqs) >= 0.99


def test_unknown_tag_rejected():
    with pytest.raises(ValueError):
        TrigramTagger(tagset=["CON"]).fit([["a"]], [["XXX"]])


def test_known_single_token_gets_majority_tag():
    sentences = [["bank"], ["bank"], ["bank"]]
    tags = [["CON"], ["CON"], ["PER"]]
    model = TrigramTagger().fit(sentences, tags)
    assert model.predict(["bank"]) == ["CON"]


def test_viterbi_equals_enumeration_on_short_sentences():
    rng = random.Random(23)
    for trial in range(40):
        sentences, tag_seqs = random_corpus(rng, rng.randint(2, 8))
        model = TrigramTagger().fit(sentences, tag_seqs)
        for _ in range(5):
            length = rng.randint(1, 6)
            tokens = [rng.choice(WORDS + ["unseenword"]) for _ in range(length)]
            assert model.predict(tokens) == brute_force_tag(model, tokens), tokens


def test_suffix_model_generalizes():
    sentences = [["eighteen", "cats"], ["the", "dog"]]
    tags = [["QUC", "CON"], ["DEF", "CON"]]
    model = TrigramTagger().fit(sentences, tags)
    assert model.predict(["nineteen"]) == ["QUC"]


def test_suffix_backoff_never_zero():
    model = TrigramTagger().fit([["a", "b"]], [["CON", "NIL"]])
    scores = model._unknown_emission("zzzz")
    assert all(p > 0 for p in scores.values())
    assert abs(sum(scores.values()) - 1.0) < 1e-12


def test_interpolation_weights_sum_to_one():
    rng = random.Random(5)
    sentences, tag_seqs = random_corpus(rng, 20)
    model = TrigramTagger().fit(sentences, tag_seqs)
    assert abs(sum(model.lambdas_) - 1.0) < 1e-12
    # Smoothed transition probabilities stay in (0, 1].
    for a in model.tags_ + [BOS]:
        for b in model.tags_ + [BOS]:
            for c in model.tags_ + [EOS]:
                p = model.transition_prob(a, b, c)
                assert 0.0 <= p <= 1.0 + 1e-12


def test_retraining_is_deterministic():
    rng = random.Random(17)
    sentences, tag_seqs = random_corpus(rng, 30)
    m1 = TrigramTagger().fit(sentences, tag_seqs)
    m2 = TrigramTagger().fit(sentences, tag_seqs)
    assert m1.to_text() == m2.to_text()
    probe = [["the", "saw", "unseen"], ["eight"]]
    assert [m1.predict(s) for s in probe] == [m2.predict(s) for s in probe]


def test_model_file_round_trip_bit_exact():
    rng = random.Random(29)
    sentences, tag_seqs = random_corpus(rng, 15)
    model = TrigramTagger().fit(sentences, tag_seqs)
    clone = TrigramTagger.from_text(model.to_text())
    assert clone.to_text() == model.to_text()
    for sentence in sentences:
        assert clone.predict(sentence) == model.predict(sentence)


def test_kbest_lists_sorted_and_head_matches_viterbi():
    rng = random.Random(31)
    sentences, tag_seqs = random_corpus(rng, 10)
    model = TrigramTagger().fit(sentences, tag_seqs)
    for _ in range(10):
        tokens = [rng.choice(WORDS) for _ in range(rng.randint(1, 6))]
        viterbi = model.predict(tokens)
        kbest = model.predict_kbest(tokens, k=3)
        for i, options in enumerate(kbest):
            assert options[0][0] == viterbi[i]
            scores = [s for _, s in options]
            assert scores == sorted(scores, reverse=True)
            assert len(options) <= 3


# -- role labeler ---------------------------------------------------------------

ROLES = ["NONE", "Agent", "Theme", "Time"]


def role_corpus():
    # (semtag, symbol, category) triples with a consistent role pattern.
    s1 = [("PER", "nobel", "NP"), ("EPS", "invent", "(S\\NP)/NP"),
          ("CON", "dynamite", "NP"), ("NIL", ".", "PUNCT")]
    r1 = ["Agent", "NONE", "Theme", "NONE"]
    s2 = [("PER", "tom", "NP"), ("EPS", "buy", "(S\\NP)/NP"),
          ("CON", "apple", "NP"), ("NIL", ".", "PUNCT")]
    r2 = ["Agent", "NONE", "Theme", "NONE"]
    s3 = [("CON", "dog", "NP"), ("EPS", "sleep", "S\\NP"), ("NIL", ".", "PUNCT")]
    r3 = ["Agent", "NONE", "NONE"]
    return [s1, s2, s3], [r1, r2, r3]


def brute_force_roles(model: ChainRoleLabeler, sentence):
    best = None
    for seq in itertools.product(model.roles_, repeat=len(sentence)):
        score = 0
        prev = BOS
        for i, role in enumerate(seq):
            score = (score + model.transition_score(prev, role)) + model.local_score(
                sentence, i, role
            )
            prev = role
        if best is None or score > best[0] or (score == best[0] and seq < best[1]):
            best = (score, seq)
    return list(best[1])


def test_role_memorization():
    sentences, roles = role_corpus()
    model = ChainRoleLabeler(roles=ROLES).fit(sentences, roles)
    for sent, gold in zip(sentences, roles):
        assert model.predict(sent) == gold


def test_role_decode_equals_enumeration():
    rng = random.Random(41)
    sentences, roles = role_corpus()
    model = ChainRoleLabeler(roles=ROLES).fit(sentences, roles)
    feats = [("PER", "nobel", "NP"), ("EPS", "invent", "(S\\NP)/NP"),
             ("CON", "dynamite", "NP"), ("CON", "dog", "NP"), ("NIL", ".", "PUNCT")]
    for _ in range(30):
        sentence = [rng.choice(feats) for _ in range(rng.randint(1, 5))]
        assert model.predict(sentence) == brute_force_roles(model, sentence)


def test_empty_role_inventory_rejected():
    with pytest.raises(ValueError):
        ChainRoleLabeler(roles=[]).fit([], [])


def test_missing_feature_layer_rejected():
    with pytest.raises(ValueError):
        ChainRoleLabeler(roles=ROLES).fit([[("PER", None, "NP")]], [["Agent"]])


def test_all_punctuation_sentence_gets_none():
    sentences, roles = role_corpus()
    model = ChainRoleLabeler(roles=ROLES).fit(sentences, roles)
    punct = [("NIL", ".", "PUNCT"), ("NIL", ".", "PUNCT")]
    assert model.predict(punct) == ["NONE", "NONE"]


def test_decode_invariant_under_weight_insertion_order():
    rng = random.Random(43)
    sentences, roles = role_corpus()
    model = ChainRoleLabeler(roles=ROLES).fit(sentences, roles)
    shuffled = ChainRoleLabeler(roles=ROLES)
    items = list(model.weights_.items())
    rng.shuffle(items)
    shuffled.roles_ = model.roles_
    shuffled.weights_ = dict(items)
    for sent in sentences:
        assert shuffled.predict(sent) == model.predict(sent)


def test_role_model_file_round_trip():
    sentences, roles = role_corpus()
    model = ChainRoleLabeler(roles=ROLES).fit(sentences, roles)
    clone = ChainRoleLabeler.from_text(model.to_text())
    assert clone.to_text() == model.to_text()
    for sent in sentences:
        assert clone.predict(sent) == model.predict(sent)


def test_feature_window_shape():
    sentence = [("A", "a", "X"), ("B", "b", "Y")]
    feats = role_features(sentence, 0)
    assert ("sem", 0, "A") in feats
    assert ("sem", 1, "B") in feats
    assert ("sym", -1, "<pad>") in feats

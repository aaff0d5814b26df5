from meaningbank.symboliser import LemmaLexicon, Symboliser


def test_worked_example_eight_to_digit():
    model = Symboliser().fit([("eight", "QUC", "8")])
    sym = model.symbolise("eight", "QUC")
    assert sym.lemma == "eight"
    assert sym.symbol == "8"


def test_majority_symbol_wins():
    triples = [("bank", "CON", "bank")] * 2 + [("bank", "CON", "bank~institution")]
    model = Symboliser().fit(triples)
    assert model.symbolise("bank", "CON").symbol == "bank"


def test_tie_breaks_lexicographically():
    model = Symboliser().fit([("colour", "CON", "colour"), ("colour", "CON", "color")])
    assert model.symbolise("colour", "CON").symbol == "color"


def test_unseen_pair_falls_back_to_lemma():
    model = Symboliser().fit([("eight", "QUC", "8")])
    assert model.symbolise("zebra", "CON").symbol == "zebra"


def test_symbolise_is_pure():
    model = Symboliser().fit([("eight", "QUC", "8")])
    assert model.symbolise("eight", "QUC") == model.symbolise("eight", "QUC")


def test_gold_symbols_reproduced_for_unambiguous_pairs():
    triples = [
        ("eight", "QUC", "8"),
        ("dynamite", "CON", "dynamite"),
        ("nobel", "PER", "alfred~nobel"),
    ]
    model = Symboliser().fit(triples)
    for lemma, semtag, gold in triples:
        assert model.lookup(lemma, semtag) == gold


# Suffix-rule oracle: 20 verbs with hand-fixed lemmas.
ED_VERBS = {
    "invented": "invent",
    "walked": "walk",
    "jumped": "jump",
    "wanted": "want",
    "called": "call",
    "filled": "fill",
    "stopped": "stop",
    "planned": "plan",
    "dropped": "drop",
    "grabbed": "grab",
    "invited": "invite",
    "hoped": "hope",
    "missed": "miss",
    "fizzed": "fizz",
    "opened": "open",
    "followed": "follow",
    "answered": "answer",
    "painted": "paint",
    "rolled": "roll",
    "visited": "visit",
}


def test_ed_suffix_rule_on_verb_list():
    lexicon = LemmaLexicon(known={"invite", "hope", "visit", "open", "follow", "answer",
                                  "paint", "roll", "miss", "fizz", "call", "fill"})
    for form, lemma in ED_VERBS.items():
        assert lexicon.lemmatize(form) == lemma, form


def test_other_suffix_rules():
    lexicon = LemmaLexicon(known={"make", "fly"})
    assert lexicon.lemmatize("making") == "make"
    assert lexicon.lemmatize("running") == "run"
    assert lexicon.lemmatize("flies") == "fly"
    assert lexicon.lemmatize("boxes") == "box"
    assert lexicon.lemmatize("cats") == "cat"
    assert lexicon.lemmatize("glass") == "glass"
    assert lexicon.lemmatize("bought") == "buy"  # irregular from the shipped table


def test_lemmatize_is_total():
    lexicon = LemmaLexicon(exceptions={}, known=set())
    assert lexicon.lemmatize("xyzzy") == "xyzzy"
    assert lexicon.lemmatize("") == ""


def test_table_tsv_round_trip():
    model = Symboliser().fit([("eight", "QUC", "8"), ("eight", "QUC", "8"), ("bank", "CON", "bank")])
    clone = Symboliser.from_text(model.to_text())
    assert clone.to_text() == model.to_text()
    assert clone.lookup("eight", "QUC") == "8"

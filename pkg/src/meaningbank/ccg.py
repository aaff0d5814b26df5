"""CKY parsing over supertagged tokens with application and composition rules.

Combinators: forward/backward application (FA, BA), forward/backward
composition (FC, BC), backward crossed composition (BCX) for non-English
word orders, and punctuation absorption (LP, RP). The parser maximizes the
sum of leaf supertag scores, preferring fewer compositions and then more
right-branching trees, with a final canonical tie-break so parsing is
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .categories import Category, FORWARD, BACKWARD, PUNCT, S, parse_category
from .taggers import TrigramTagger

COMBINATORS = ("FA", "BA", "FC", "BC", "BCX")
COMPOSITIONS = frozenset({"FC", "BC", "BCX"})


class ParseError(ValueError):
    pass


def combine(left: Category, right: Category, combinators=COMBINATORS):
    """All (combinator, result category) pairs derivable from two categories."""
    out = []
    if "FA" in combinators and left.slash == FORWARD and left.arg == right:
        out.append(("FA", left.result))
    if "BA" in combinators and right.slash == BACKWARD and right.arg == left:
        out.append(("BA", right.result))
    if (
        "FC" in combinators
        and left.slash == FORWARD
        and right.slash == FORWARD
        and left.arg == right.result
    ):
        out.append(("FC", Category.functor(left.result, FORWARD, right.arg)))
    if (
        "BC" in combinators
        and left.slash == BACKWARD
        and right.slash == BACKWARD
        and right.arg == left.result
    ):
        out.append(("BC", Category.functor(right.result, BACKWARD, left.arg)))
    if (
        "BCX" in combinators
        and left.slash == FORWARD
        and right.slash == BACKWARD
        and right.arg == left.result
    ):
        out.append(("BCX", Category.functor(right.result, FORWARD, left.arg)))
    # Punctuation attaches to the adjacent constituent.
    if left == PUNCT and right != PUNCT:
        out.append(("LP", right))
    if right == PUNCT and left != PUNCT:
        out.append(("RP", left))
    return out


@dataclass(frozen=True)
class Derivation:
    """Binary derivation tree; leaves carry (token index, category, score)."""

    category: Category
    combinator: str | None = None  # None for leaves
    token_index: int | None = None
    score: float = 0.0
    left: "Derivation | None" = None
    right: "Derivation | None" = None
    leaves_count: int = 1
    compositions: int = 0
    rb_penalty: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.combinator is None

    def leaves(self) -> list["Derivation"]:
        if self.is_leaf:
            return [self]
        return self.left.leaves() + self.right.leaves()

    def sort_key(self):
        return (-self.score, self.compositions, self.rb_penalty, self.canonical_key())

    def canonical_key(self):
        if self.is_leaf:
            return ("lex", str(self.token_index), str(self.category))
        return (
            self.combinator,
            str(self.category),
            self.left.canonical_key(),
            self.right.canonical_key(),
        )

    def __str__(self) -> str:
        if self.is_leaf:
            return f"(lex {self.token_index} {self.category})"
        return f"({self.combinator} {self.left} {self.right})"


def leaf(token_index: int, category: Category, score: float = 0.0) -> Derivation:
    return Derivation(category=category, token_index=token_index, score=score)


def node(combinator: str, category: Category, left: Derivation, right: Derivation) -> Derivation:
    return Derivation(
        category=category,
        combinator=combinator,
        left=left,
        right=right,
        score=left.score + right.score,
        leaves_count=left.leaves_count + right.leaves_count,
        compositions=left.compositions
        + right.compositions
        + (1 if combinator in COMPOSITIONS else 0),
        rb_penalty=left.rb_penalty + right.rb_penalty + left.leaves_count,
    )


@dataclass
class ParseResult:
    complete: bool
    derivation: Derivation | None
    fragments: list[Derivation] = field(default_factory=list)

    @property
    def root_category(self) -> Category | None:
        return self.derivation.category if self.derivation else None


def _better(a: Derivation | None, b: Derivation) -> Derivation:
    if a is None or b.sort_key() < a.sort_key():
        return b
    return a


def parse(
    candidates: list[list[tuple[Category, float]]],
    combinators=COMBINATORS,
) -> ParseResult:
    """CKY search for the best complete derivation.

    ``candidates`` holds per-token (category, log score) options. When no
    single constituent covers the sentence, the best partial analysis (fewest
    fragments, then best fragment keys) is returned flagged incomplete.
    """
    n = len(candidates)
    if n == 0:
        raise ParseError("cannot parse an empty sentence")
    for i, options in enumerate(candidates):
        if not options:
            raise ParseError(f"token {i} has no category candidates")
    chart: dict[tuple[int, int], dict[Category, Derivation]] = {}
    for i, options in enumerate(candidates):
        cell: dict[Category, Derivation] = {}
        for cat, score in options:
            cell[cat] = _better(cell.get(cat), leaf(i, cat, score))
        chart[(i, i + 1)] = cell
    for span in range(2, n + 1):
        for i in range(n - span + 1):
            j = i + span
            cell = {}
            for split in range(i + 1, j):
                for lcat, litem in chart[(i, split)].items():
                    for rcat, ritem in chart[(split, j)].items():
                        for comb, result in combine(lcat, rcat, combinators):
                            cand = node(comb, result, litem, ritem)
                            cell[result] = _better(cell.get(result), cand)
            chart[(i, j)] = cell
    full = chart[(0, n)]
    if full:
        s_items = [item for cat, item in full.items() if cat == S]
        pool = s_items if s_items else list(full.values())
        best = min(pool, key=Derivation.sort_key)
        return ParseResult(complete=True, derivation=best, fragments=[best])
    # Fewest-fragment cover of the token span.
    INF = float("inf")
    best_cover: list[tuple[float, tuple, list[Derivation]] | None] = [None] * (n + 1)
    best_cover[0] = (0, (), [])
    for j in range(1, n + 1):
        for i in range(j):
            if best_cover[i] is None or not chart[(i, j)]:
                continue
            frag = min(chart[(i, j)].values(), key=Derivation.sort_key)
            count = best_cover[i][0] + 1
            key = best_cover[i][1] + (frag.sort_key(),)
            cand = (count, key, best_cover[i][2] + [frag])
            if best_cover[j] is None or (cand[0], cand[1]) < (best_cover[j][0], best_cover[j][1]):
                best_cover[j] = cand
    fragments = best_cover[n][2]
    return ParseResult(complete=False, derivation=None, fragments=fragments)


def check_derivation(d: Derivation, combinators=COMBINATORS) -> bool:
    """Recompute every internal node from its children."""
    if d.is_leaf:
        return True
    results = combine(d.left.category, d.right.category, combinators)
    if (d.combinator, d.category) not in results:
        return False
    return check_derivation(d.left, combinators) and check_derivation(d.right, combinators)


def assign_categories(
    supertagger: TrigramTagger, tokens: list[str], k: int = 3
) -> list[list[tuple[Category, float]]]:
    """Per-token k-best lexical categories from the supertag model."""
    kbest = supertagger.predict_kbest(tokens, k)
    return [[(parse_category(tag), score) for tag, score in options] for options in kbest]


def derivation_to_str(d: Derivation) -> str:
    return str(d)


def parse_derivation(text: str) -> Derivation:
    """Parse the bracketed serialization back into a tree (scores are dropped)."""
    pos = 0

    def skip_spaces():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def expect(char: str):
        nonlocal pos
        skip_spaces()
        if pos >= len(text) or text[pos] != char:
            raise ParseError(f"expected {char!r} at offset {pos} in {text!r}")
        pos += 1

    def read_word() -> str:
        nonlocal pos
        skip_spaces()
        start = pos
        while pos < len(text) and not text[pos].isspace() and text[pos] not in "()":
            pos += 1
        if start == pos:
            raise ParseError(f"expected a word at offset {pos} in {text!r}")
        return text[start:pos]

    def read_balanced() -> str:
        # The category runs to the close paren of the current node; it may
        # itself contain balanced parentheses.
        nonlocal pos
        skip_spaces()
        start = pos
        depth = 0
        while pos < len(text):
            c = text[pos]
            if c == "(":
                depth += 1
            elif c == ")":
                if depth == 0:
                    break
                depth -= 1
            pos += 1
        return text[start:pos].strip()

    def parse_node() -> Derivation:
        expect("(")
        head = read_word()
        if head == "lex":
            index = int(read_word())
            category = parse_category(read_balanced())
            expect(")")
            return leaf(index, category)
        left = parse_node()
        right = parse_node()
        expect(")")
        results = dict(combine(left.category, right.category))
        if head not in results:
            raise ParseError(f"combinator {head} does not apply at {text!r}")
        return node(head, results[head], left, right)

    result = parse_node()
    skip_spaces()
    if pos != len(text):
        raise ParseError(f"trailing characters in derivation {text!r}")
    return result

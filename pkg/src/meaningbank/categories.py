"""CCG categories and their canonical string notation.

The notation follows the usual convention: ``/`` and ``\\`` associate to the
left, so ``S\\NP/NP`` is ``(S\\NP)/NP``, and parentheses override grouping.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

ATOMS = ("S", "NP", "N", "PP", "PUNCT")

FORWARD = "/"
BACKWARD = "\\"

_TOKEN_RE = re.compile(r"[A-Za-z]+|[/\\()]")


class CategoryError(ValueError):
    """Raised for strings that are not well-formed category notation."""


@dataclass(frozen=True)
class Category:
    """A CCG category term: an atom, or a functor ``result/arg`` | ``result\\arg``."""

    atom: str | None = None
    result: "Category | None" = None
    slash: str | None = None
    arg: "Category | None" = None

    @classmethod
    def atomic(cls, name: str) -> "Category":
        return cls(atom=name)

    @classmethod
    def functor(cls, result: "Category", slash: str, arg: "Category") -> "Category":
        if slash not in (FORWARD, BACKWARD):
            raise CategoryError(f"bad slash {slash!r}")
        return cls(result=result, slash=slash, arg=arg)

    @property
    def is_atomic(self) -> bool:
        return self.atom is not None

    def __str__(self) -> str:
        if self.is_atomic:
            return self.atom  # type: ignore[return-value]
        # Canonical form parenthesizes every functor part: (S\NP)/NP.
        result = str(self.result) if self.result.is_atomic else f"({self.result})"
        arg = str(self.arg) if self.arg.is_atomic else f"({self.arg})"
        return f"{result}{self.slash}{arg}"

    def __repr__(self) -> str:
        return f"Category({str(self)!r})"


# Frequently used atoms.
S = Category.atomic("S")
NP = Category.atomic("NP")
N = Category.atomic("N")
PP = Category.atomic("PP")
PUNCT = Category.atomic("PUNCT")


def parse_category(text: str) -> Category:
    """Parse canonical category notation into a :class:`Category` term."""
    tokens = _TOKEN_RE.findall(text)
    if "".join(tokens).replace(" ", "") != text.replace(" ", ""):
        raise CategoryError(f"stray characters in category {text!r}")
    pos = 0

    def peek() -> str | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> str:
        nonlocal pos
        if pos >= len(tokens):
            raise CategoryError(f"unexpected end of category {text!r}")
        tok = tokens[pos]
        pos += 1
        return tok

    def parse_primary() -> Category:
        tok = take()
        if tok == "(":
            inner = parse_expr()
            if take() != ")":
                raise CategoryError(f"missing ')' in {text!r}")
            return inner
        if tok in (FORWARD, BACKWARD, ")"):
            raise CategoryError(f"unexpected {tok!r} in {text!r}")
        return Category.atomic(tok)

    def parse_expr() -> Category:
        cur = parse_primary()
        while peek() in (FORWARD, BACKWARD):
            slash = take()
            arg = parse_primary()
            cur = Category.functor(cur, slash, arg)
        return cur

    result = parse_expr()
    if pos != len(tokens):
        raise CategoryError(f"trailing tokens in category {text!r}")
    return result

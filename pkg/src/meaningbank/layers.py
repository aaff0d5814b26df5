"""Per-token value types for the seven annotation layers.

Every value serializes to a single TSV cell and parses back identically;
the codecs here are the one place that knows the cell syntax.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

from .categories import Category, parse_category

# Layer storage keys, in the display order of the annotation table.
LAYER_NAMES = ("tok", "sem", "sym", "sen", "rol", "cor", "cat")

MACHINE = "machine"
HUMAN = "human"

NONE_VALUE = "NONE"


class LayerError(ValueError):
    """Raised for unknown layer names or malformed cell values."""


@dataclass(frozen=True)
class Token:
    """A word token: surface text plus its character span in the raw text."""

    text: str
    start: int
    end: int
    sentence_index: int = 0

    @property
    def char_span(self) -> tuple[int, int]:
        return (self.start, self.end)

    @property
    def is_punctuation(self) -> bool:
        return bool(self.text) and all(not c.isalnum() for c in self.text)


@dataclass(frozen=True)
class SemTag:
    tag: str


@dataclass(frozen=True)
class Symbol:
    """A non-logical symbol; multiword symbols join their parts with ``~``."""

    lemma: str
    symbol: str


@dataclass(frozen=True)
class Sense:
    """A word sense like ``n.01``; function tokens carry no sense."""

    pos: str
    number: str

    def __str__(self) -> str:
        return f"{self.pos}.{self.number}"

    @classmethod
    def parse(cls, text: str) -> "Sense":
        pos, _, number = text.partition(".")
        if pos not in ("n", "v", "a", "r") or not number.isdigit() or len(number) != 2:
            raise LayerError(f"bad sense {text!r}")
        return cls(pos, number)


@dataclass(frozen=True)
class RoleTag:
    """A thematic role, a comparison operator (EQU/TPR/LES), or NONE."""

    role: str

    @property
    def is_none(self) -> bool:
        return self.role == NONE_VALUE


@dataclass(frozen=True)
class CorefLink:
    """Antecedent token index within the document, or None for no link."""

    antecedent: int | None

    @property
    def is_none(self) -> bool:
        return self.antecedent is None


def escape_cell(text: str) -> str:
    return text.replace("\\", "\\\\").replace("\t", "\\t").replace("\n", "\\n")


def unescape_cell(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        c = text[i]
        if c == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            out.append({"t": "\t", "n": "\n", "\\": "\\"}.get(nxt, nxt))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def token_to_cell(token: Token) -> str:
    return f"{token.start}:{token.end}:{token.sentence_index}:{token.text}"


def token_from_cell(cell: str) -> Token:
    parts = cell.split(":", 3)
    if len(parts) != 4:
        raise LayerError(f"bad token cell {cell!r}")
    start, end, sent, text = parts
    return Token(text=text, start=int(start), end=int(end), sentence_index=int(sent))


def value_to_cell(layer: str, value) -> str:
    """Render a typed layer value as its TSV cell string."""
    if layer == "tok":
        return token_to_cell(value)
    if layer == "sem":
        return value.tag
    if layer == "sym":
        return value.symbol
    if layer == "sen":
        return "" if value is None else str(value)
    if layer == "rol":
        return value.role
    if layer == "cor":
        return NONE_VALUE if value.antecedent is None else str(value.antecedent)
    if layer == "cat":
        return str(value)
    raise LayerError(f"unknown layer {layer!r}")


def value_from_cell(layer: str, cell: str):
    """Parse a TSV cell back into the typed layer value."""
    if layer == "tok":
        return token_from_cell(cell)
    if layer == "sem":
        return SemTag(cell)
    if layer == "sym":
        return Symbol(lemma=cell, symbol=cell)
    if layer == "sen":
        return None if cell == "" else Sense.parse(cell)
    if layer == "rol":
        return RoleTag(cell)
    if layer == "cor":
        return CorefLink(None if cell == NONE_VALUE else int(cell))
    if layer == "cat":
        return parse_category(cell)
    raise LayerError(f"unknown layer {layer!r}")


def _read_config(name: str) -> list[list[str]]:
    text = resources.files("meaningbank.data").joinpath(name).read_text("utf-8")
    rows = []
    for line in text.splitlines():
        if not line or line.startswith("#"):
            continue
        rows.append(line.split("\t"))
    return rows


class Inventories:
    """The configured semantic tagset, role inventory, and sense lexicon."""

    def __init__(
        self,
        semtags: dict[str, str] | None = None,
        roles: list[str] | None = None,
        senses: dict[tuple[str, str], list[str]] | None = None,
    ):
        self.semtags = semtags if semtags is not None else dict(_read_config("semtags.tsv"))
        if roles is None:
            roles = [row[0] for row in _read_config("roles.tsv")]
        self.roles = list(roles)
        if senses is None:
            senses = {}
            for lemma, pos, sense_list in _read_config("senses.tsv"):
                senses[(lemma, pos)] = sense_list.split(",")
        self.senses = senses

    def check_semtag(self, tag: str) -> str:
        if tag not in self.semtags:
            raise LayerError(f"semtag {tag!r} not in tagset")
        return tag

    def check_role(self, role: str) -> str:
        if role not in self.roles:
            raise LayerError(f"role {role!r} not in inventory")
        return role

    def first_sense(self, lemma: str, pos: str) -> Sense:
        """Default sense for a concept token: first listed sense, else the .01 sense."""
        numbers = self.senses.get((lemma, pos))
        return Sense(pos, numbers[0] if numbers else "01")


_DEFAULT: Inventories | None = None


def default_inventories() -> Inventories:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = Inventories()
    return _DEFAULT

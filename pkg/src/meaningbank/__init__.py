"""Parallel meaning banking: layered annotation, projection, and DRS matching."""

from .categories import Category, parse_category
from .corpus import CorpusStore, DocumentId, Layer, Translation
from .drs import Drs, clauses_to_drs, to_clauses
from .matcher import MatchResult, match

__all__ = [
    "Category",
    "parse_category",
    "CorpusStore",
    "DocumentId",
    "Layer",
    "Translation",
    "Drs",
    "clauses_to_drs",
    "to_clauses",
    "MatchResult",
    "match",
]

__version__ = "0.1.0"

"""Persistent document store with part/doc identifiers and release export.

On disk a corpus is one directory per part, one subdirectory per document,
and one TSV file per (language, layer): ``parts/03/0766/en.sem.tsv``.
"""

from __future__ import annotations

import hashlib
import shutil
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .layers import HUMAN, LAYER_NAMES, MACHINE, escape_cell, unescape_cell

GOLD = "gold"
SILVER = "silver"
BRONZE = "bronze"
TIERS = (GOLD, SILVER, BRONZE)


class CorpusError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class DocumentId:
    """A ``part/doc`` identifier: two-digit part, four-digit document number."""

    part: int
    doc: int

    def __post_init__(self):
        if not 0 <= self.part <= 99:
            raise CorpusError(f"part {self.part} out of range")
        if not 0 <= self.doc <= 9999:
            raise CorpusError(f"doc {self.doc} out of range")

    def __str__(self) -> str:
        return f"{self.part:02d}/{self.doc:04d}"

    @classmethod
    def parse(cls, text: str) -> "DocumentId":
        part, _, doc = text.partition("/")
        if not (part.isdigit() and doc.isdigit()):
            raise CorpusError(f"bad document id {text!r}")
        return cls(int(part), int(doc))


def part_for_text(english_text: str) -> int:
    """Deterministic part assignment: stable hash of the English text mod 100."""
    digest = hashlib.md5(english_text.encode("utf-8")).hexdigest()
    return int(digest, 16) % 100


@dataclass
class Layer:
    """Per-token cell values with machine/human provenance flags."""

    values: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)
    revision: int = 0

    @property
    def status(self) -> str:
        # An empty layer has no corrections, which makes it bronze.
        if not self.values:
            return BRONZE
        if all(f == HUMAN for f in self.flags):
            return GOLD
        if any(f == HUMAN for f in self.flags):
            return SILVER
        return BRONZE

    def copy(self) -> "Layer":
        return Layer(list(self.values), list(self.flags), self.revision)


@dataclass
class Translation:
    lang: str
    raw: str
    layers: dict[str, Layer] = field(default_factory=dict)

    def __post_init__(self):
        for name in LAYER_NAMES:
            self.layers.setdefault(name, Layer())

    @property
    def token_count(self) -> int:
        return len(self.layers["tok"].values)

    @property
    def status(self) -> str:
        """Quality tier of the whole translation.

        Gold means every layer is gold; a mix of human and machine tokens is
        silver; anything without a single human token is bronze.
        """
        statuses = [self.layers[name].status for name in LAYER_NAMES]
        if all(s == GOLD for s in statuses):
            return GOLD
        flags = [f for name in LAYER_NAMES for f in self.layers[name].flags]
        if any(f == HUMAN for f in flags) and any(f == MACHINE for f in flags):
            return SILVER
        return BRONZE


@dataclass
class Document:
    id: DocumentId
    translations: dict[str, Translation] = field(default_factory=dict)


class CorpusStore:
    """In-memory corpus with per-document write serialization and TSV persistence."""

    def __init__(self):
        self.documents: dict[DocumentId, Document] = {}
        self._registry_lock = threading.Lock()
        self._doc_locks: dict[DocumentId, threading.Lock] = {}

    def _lock_for(self, doc_id: DocumentId) -> threading.Lock:
        with self._registry_lock:
            return self._doc_locks.setdefault(doc_id, threading.Lock())

    # -- documents ---------------------------------------------------------

    def add_document(
        self, english_text: str, translations: list[tuple[str, str]] = ()
    ) -> DocumentId:
        if not english_text:
            raise CorpusError("English text must be non-empty")
        langs = [lang for lang, _ in translations]
        if len(set(langs)) != len(langs) or "en" in langs:
            raise CorpusError("translation languages must be distinct and non-English")
        for lang, text in translations:
            if not text:
                raise CorpusError(f"empty text for language {lang!r}")
        with self._registry_lock:
            part = part_for_text(english_text)
            used = {d.doc for d in self.documents if d.part == part}
            doc_num = next(n for n in range(10000) if n not in used)
            doc_id = DocumentId(part, doc_num)
            doc = Document(doc_id)
            doc.translations["en"] = Translation("en", english_text)
            for lang, text in translations:
                doc.translations[lang] = Translation(lang, text)
            self.documents[doc_id] = doc
        return doc_id

    def get(self, doc_id: DocumentId) -> Document:
        try:
            return self.documents[doc_id]
        except KeyError:
            raise CorpusError(f"no document {doc_id}") from None

    def get_translation(self, doc_id: DocumentId, lang: str) -> Translation:
        doc = self.get(doc_id)
        try:
            return doc.translations[lang]
        except KeyError:
            raise CorpusError(f"document {doc_id} has no {lang!r} translation") from None

    def add_translation(self, doc_id: DocumentId, lang: str, text: str) -> Translation:
        with self._lock_for(doc_id):
            doc = self.get(doc_id)
            if lang in doc.translations:
                raise CorpusError(f"document {doc_id} already has language {lang!r}")
            if not text:
                raise CorpusError("translation text must be non-empty")
            tr = Translation(lang, text)
            doc.translations[lang] = tr
            return tr

    def find_by_english_text(self, text: str) -> DocumentId | None:
        for doc_id in sorted(self.documents):
            if self.documents[doc_id].translations["en"].raw == text:
                return doc_id
        return None

    # -- layers ------------------------------------------------------------

    def set_layer(
        self,
        doc_id: DocumentId,
        lang: str,
        layer_name: str,
        values: list[str],
        provenance,
        *,
        force: bool = False,
    ) -> Layer:
        """Replace a layer's values and flags; recomputes status implicitly.

        ``provenance`` is a single flag applied to every token or a per-token
        list. A machine flag over a token previously marked human is rejected
        unless ``force`` is given.
        """
        if layer_name not in LAYER_NAMES:
            raise CorpusError(f"unknown layer {layer_name!r}")
        if isinstance(provenance, str):
            provenance = [provenance] * len(values)
        if len(provenance) != len(values):
            raise CorpusError("provenance mask length mismatch")
        for flag in provenance:
            if flag not in (MACHINE, HUMAN):
                raise CorpusError(f"bad provenance flag {flag!r}")
        with self._lock_for(doc_id):
            tr = self.get_translation(doc_id, lang)
            if layer_name != "tok":
                n_tokens = tr.token_count
                if len(values) != n_tokens:
                    raise CorpusError(
                        f"layer {layer_name!r} needs {n_tokens} values, got {len(values)}"
                    )
            old = tr.layers[layer_name]
            if not force:
                for i, flag in enumerate(provenance):
                    if flag == MACHINE and i < len(old.flags) and old.flags[i] == HUMAN:
                        raise CorpusError(
                            f"machine overwrite of human token {i} in {layer_name!r}"
                            " (use force to override)"
                        )
            tr.layers[layer_name] = Layer(list(values), list(provenance), old.revision + 1)
            return tr.layers[layer_name]

    def set_token_value(
        self, doc_id: DocumentId, lang: str, layer_name: str, index: int, value: str
    ) -> Layer:
        """Human correction of a single token cell."""
        with self._lock_for(doc_id):
            tr = self.get_translation(doc_id, lang)
            layer = tr.layers[layer_name]
            if not 0 <= index < len(layer.values):
                raise CorpusError(f"token index {index} out of range")
            layer.values[index] = value
            layer.flags[index] = HUMAN
            layer.revision += 1
            return layer

    # -- persistence -------------------------------------------------------

    def save(self, root: str | Path) -> None:
        root = Path(root)
        parts_dir = root / "parts"
        if parts_dir.exists():
            shutil.rmtree(parts_dir)
        for doc_id in sorted(self.documents):
            doc = self.documents[doc_id]
            doc_dir = parts_dir / f"{doc_id.part:02d}" / f"{doc_id.doc:04d}"
            doc_dir.mkdir(parents=True)
            for lang in sorted(doc.translations):
                tr = doc.translations[lang]
                (doc_dir / f"{lang}.raw.txt").write_text(tr.raw, "utf-8")
                for name in LAYER_NAMES:
                    layer = tr.layers[name]
                    lines = [
                        f"{i}\t{escape_cell(v)}\t{f}"
                        for i, (v, f) in enumerate(zip(layer.values, layer.flags))
                    ]
                    text = "".join(line + "\n" for line in lines)
                    (doc_dir / f"{lang}.{name}.tsv").write_text(text, "utf-8")

    @classmethod
    def load(cls, root: str | Path) -> "CorpusStore":
        root = Path(root)
        store = cls()
        parts_dir = root / "parts"
        if not parts_dir.is_dir():
            return store
        for part_dir in sorted(parts_dir.iterdir()):
            for doc_dir in sorted(part_dir.iterdir()):
                doc_id = DocumentId(int(part_dir.name), int(doc_dir.name))
                doc = Document(doc_id)
                for raw_file in sorted(doc_dir.glob("*.raw.txt")):
                    lang = raw_file.name.split(".")[0]
                    tr = Translation(lang, raw_file.read_text("utf-8"))
                    for name in LAYER_NAMES:
                        layer_file = doc_dir / f"{lang}.{name}.tsv"
                        if not layer_file.exists():
                            continue
                        values, flags = [], []
                        for line in layer_file.read_text("utf-8").splitlines():
                            _, cell, flag = line.split("\t")
                            values.append(unescape_cell(cell))
                            flags.append(flag)
                        tr.layers[name] = Layer(values, flags)
                    doc.translations[lang] = tr
                store.documents[doc_id] = doc
        return store

    # -- releases ----------------------------------------------------------

    def release_counts(self, tier: str) -> dict[str, int]:
        counts: dict[str, int] = {}
        for doc in self.documents.values():
            for lang, tr in doc.translations.items():
                if tr.status == tier:
                    counts[lang] = counts.get(lang, 0) + 1
        return counts

    def export_release(
        self, out_dir: str | Path, tier: str, release: str = "MB-0.1.0"
    ) -> dict[str, int]:
        """Write every translation at the given tier plus a ``stats.tsv`` count table."""
        if tier not in TIERS:
            raise CorpusError(f"unknown tier {tier!r}")
        out_dir = Path(out_dir)
        subset = CorpusStore()
        for doc_id in sorted(self.documents):
            doc = self.documents[doc_id]
            kept = {
                lang: tr for lang, tr in doc.translations.items() if tr.status == tier
            }
            if not kept:
                continue
            new_doc = Document(doc_id)
            new_doc.translations = {lang: kept[lang] for lang in sorted(kept)}
            subset.documents[doc_id] = new_doc
        subset.save(out_dir)
        counts = subset.release_counts(tier)
        rows = [
            f"{release}\t{tier.capitalize()}\t{lang.upper()}\t{counts[lang]:,}"
            for lang in sorted(counts, key=_lang_order)
        ]
        (out_dir / "stats.tsv").write_text("".join(r + "\n" for r in rows), "utf-8")
        return counts


def _lang_order(lang: str) -> tuple[int, str]:
    # English first, mirroring the release table column order.
    return (0 if lang == "en" else 1, lang)


def render_stats_table(store: CorpusStore, release: str = "MB-0.1.0") -> str:
    """Human-readable per-tier, per-language document counts."""
    langs = sorted(
        {lang for doc in store.documents.values() for lang in doc.translations},
        key=_lang_order,
    )
    lines = ["Release\tQuality\t" + "\t".join(lang.upper() for lang in langs)]
    for tier in TIERS:
        counts = store.release_counts(tier)
        cells = [f"{counts.get(lang, 0):,}" for lang in langs]
        lines.append(f"{release}\t{tier.capitalize()}\t" + "\t".join(cells))
    return "\n".join(lines) + "\n"

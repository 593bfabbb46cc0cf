"""Corpus ingestion and hapax bookkeeping.

A hapax legomenon is a token occurring exactly once within one document;
its corpus frequency is the number of documents in which it is a hapax.
This module tokenizes documents, tabulates hapax frequencies under two
rank assignments (dense and ordinal), and emits the time-ordered
sequence of dense ranks obtained by walking the corpus in chronological
order and replacing each hapax occurrence by its rank.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

__all__ = [
    "Document",
    "HapaxEntry",
    "HapaxTable",
    "RankSequence",
    "IngestionError",
    "EmptyTableError",
    "ConsistencyError",
    "tokenize",
    "extract_document_hapaxes",
    "build_hapax_table",
    "build_rank_sequence",
    "load_documents",
]


class IngestionError(RuntimeError):
    """A document could not be read or decoded."""


class EmptyTableError(ValueError):
    """The corpus contains no hapaxes at all."""


class ConsistencyError(RuntimeError):
    """A corpus token is missing from the table it was built from."""


# Runs of Unicode letters, with apostrophes kept when internal.
_TOKEN_RE = re.compile(r"[^\W\d_]+(?:'[^\W\d_]+)*")
_APOSTROPHE_VARIANTS = str.maketrans({"’": "'", "ʼ": "'"})


def tokenize(raw_text: str) -> list[str]:
    """Split text into lowercase word tokens.

    Digits, punctuation and whitespace separate tokens; apostrophes
    survive only between letters (curly apostrophes are normalized
    first), so "don't" stays whole while quoting marks fall away.
    """
    text = raw_text.translate(_APOSTROPHE_VARIANTS).lower()
    return _TOKEN_RE.findall(text)


@dataclass(frozen=True)
class Document:
    """One tokenized document at a fixed chronological position."""

    id: str
    order_index: int
    tokens: tuple[str, ...]

    def __post_init__(self):
        if self.order_index < 0:
            raise ValueError(f"order_index must be >= 0, got {self.order_index}")
        if any(t == "" for t in self.tokens):
            raise ValueError("tokens must not contain empty strings")


class HapaxEntry(NamedTuple):
    word: str
    frequency: int
    dense_rank: int
    ordinal_rank: int


@dataclass(frozen=True)
class HapaxTable:
    """Corpus-level hapax frequencies with dense and ordinal ranks.

    Entries are sorted by ordinal rank (frequency descending, ties
    broken lexicographically).  Dense ranks map equal frequencies to one
    shared rank with no gaps, so ``alphabet_size`` equals the number of
    distinct frequency values.
    """

    entries: tuple[HapaxEntry, ...]
    total_occurrences: int
    alphabet_size: int

    def dense_rank_of(self) -> dict[str, int]:
        return {e.word: e.dense_rank for e in self.entries}

    def frequencies(self) -> np.ndarray:
        return np.array([e.frequency for e in self.entries], dtype=int)

    def ordinal_points(self) -> list[tuple[int, int]]:
        """(ordinal_rank, frequency) pairs, the fitting view of the table."""
        return [(e.ordinal_rank, e.frequency) for e in self.entries]


@dataclass(frozen=True)
class RankSequence:
    """Time-ordered dense ranks, one per hapax occurrence."""

    values: np.ndarray
    alphabet_size: int

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.size and (v.min() < 1 or v.max() > self.alphabet_size):
            raise ValueError(f"rank values must lie in 1..{self.alphabet_size}")

    def __len__(self) -> int:
        return int(np.asarray(self.values).size)


def extract_document_hapaxes(doc: Document) -> set[str]:
    """Tokens occurring exactly once in the document."""
    counts = Counter(doc.tokens)
    return {tok for tok, c in counts.items() if c == 1}


def build_hapax_table(corpus: list[Document]) -> HapaxTable:
    """Aggregate per-document hapaxes into the corpus frequency table."""
    if not corpus:
        raise ValueError("corpus must contain at least one document")
    freq: Counter[str] = Counter()
    for doc in corpus:
        freq.update(extract_document_hapaxes(doc))
    if not freq:
        raise EmptyTableError("corpus yields an empty table: no hapaxes found")

    by_ordinal = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    distinct_freqs = sorted(set(freq.values()), reverse=True)
    dense = {f: i + 1 for i, f in enumerate(distinct_freqs)}
    entries = tuple(
        HapaxEntry(word=w, frequency=f, dense_rank=dense[f], ordinal_rank=i + 1)
        for i, (w, f) in enumerate(by_ordinal)
    )
    return HapaxTable(
        entries=entries,
        total_occurrences=sum(freq.values()),
        alphabet_size=len(distinct_freqs),
    )


def build_rank_sequence(corpus: list[Document], table: HapaxTable) -> RankSequence:
    """Walk documents in chronological order and emit dense ranks.

    Within a document hapaxes are emitted at their position of (only)
    appearance; each occurrence becomes the word's dense rank.
    """
    rank_of = table.dense_rank_of()
    out: list[int] = []
    for doc in sorted(corpus, key=lambda d: d.order_index):
        counts = Counter(doc.tokens)
        for tok in doc.tokens:
            if counts[tok] == 1:
                try:
                    out.append(rank_of[tok])
                except KeyError:
                    raise ConsistencyError(
                        f"hapax {tok!r} from document {doc.id!r} missing from table"
                    ) from None
    return RankSequence(values=np.array(out, dtype=np.int64), alphabet_size=table.alphabet_size)


def load_documents(input_dir: str | Path, manifest: str | Path | None = None) -> list[Document]:
    """Read UTF-8 ``.txt`` documents from a directory.

    Order is the manifest file order when given (one file name per
    line), otherwise lexicographic file-name order.
    """
    root = Path(input_dir)
    if not root.is_dir():
        raise IngestionError(f"input directory not found: {root}")
    if manifest is not None:
        names = [ln.strip() for ln in Path(manifest).read_text(encoding="utf-8").splitlines() if ln.strip()]
        paths = [root / name for name in names]
        for p in paths:
            if not p.is_file():
                raise IngestionError(f"manifest names a missing file: {p}")
    else:
        paths = sorted(root.glob("*.txt"), key=lambda p: p.name)
    if not paths:
        raise IngestionError(f"no documents found in {root}")

    docs = []
    for i, path in enumerate(paths):
        try:
            text = path.read_text(encoding="utf-8", errors="strict")
        except UnicodeDecodeError as exc:
            raise IngestionError(f"invalid UTF-8 in {path}: {exc}") from exc
        except OSError as exc:
            raise IngestionError(f"cannot read {path}: {exc}") from exc
        docs.append(Document(id=path.stem, order_index=i, tokens=tuple(tokenize(text))))
    return docs

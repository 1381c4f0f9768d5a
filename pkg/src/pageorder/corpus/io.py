"""Corpus persistence and splitting.

Corpora are stored as JSON Lines, one document per line with pages in
true order. Shuffles are always derived at runtime from a seed, never
persisted, so one file serves every experiment.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DomainError
from ..numcore import RngStream
from .types import Document

__all__ = ["CorpusParseError", "CorpusFormatError", "SplitError", "save_corpus", "load_corpus", "split_corpus"]


class CorpusParseError(ValueError):
    """A corpus line is not valid JSON or misses required fields."""


class CorpusFormatError(ValueError):
    """Documents disagree on embedding dimension or violate the schema."""


class SplitError(ValueError):
    """Too few documents to split."""


def save_corpus(docs: list[Document], path: str | Path) -> None:
    """Write documents as JSON Lines with shortest round-trip decimals."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for doc in docs:
            record = {
                "doc_id": doc.doc_id,
                "dim": doc.dim,
                "pages": [[float(x) for x in page] for page in doc.pages],
            }
            fh.write(json.dumps(record, separators=(",", ":")) + "\n")


def load_corpus(path: str | Path) -> list[Document]:
    """Read documents back; embeddings round-trip bit-exactly as float32."""
    path = Path(path)
    docs: list[Document] = []
    corpus_dim: int | None = None
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            if not isinstance(record, dict) or not {"doc_id", "dim", "pages"} <= set(record):
                raise CorpusParseError(f"line {lineno}: missing doc_id/dim/pages")
            pages = np.asarray(record["pages"], dtype=np.float32)
            if pages.ndim != 2 or pages.shape[1] != record["dim"]:
                raise CorpusParseError(f"line {lineno}: pages do not match declared dim {record['dim']}")
            if corpus_dim is None:
                corpus_dim = int(record["dim"])
            elif record["dim"] != corpus_dim:
                raise CorpusFormatError(
                    f"line {lineno}: dimension {record['dim']} differs from corpus dimension {corpus_dim}"
                )
            try:
                docs.append(Document(doc_id=record["doc_id"], pages=pages))
            except DomainError as exc:
                raise CorpusParseError(f"line {lineno}: {exc}") from exc
    return docs


def split_corpus(
    docs: list[Document],
    fractions: tuple[float, float, float] = (0.70, 0.15, 0.15),
    seed: int = 0,
) -> tuple[list[Document], list[Document], list[Document]]:
    """Disjoint, exhaustive train/val/test split.

    Seeded shuffle then contiguous slicing; val and test get floor(n*f)
    documents each and the remainder goes to train.
    """
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise DomainError(f"fractions must sum to 1, got {fractions}")
    if len(docs) < 3:
        raise SplitError(f"cannot split {len(docs)} documents three ways")
    n = len(docs)
    order = RngStream(seed).split("split").permutation(n)
    shuffled = [docs[i] for i in order]
    n_val = int(np.floor(n * fractions[1]))
    n_test = int(np.floor(n * fractions[2]))
    n_train = n - n_val - n_test
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_val],
        shuffled[n_train + n_val :],
    )

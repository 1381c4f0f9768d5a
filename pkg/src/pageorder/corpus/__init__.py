"""Corpus generation, persistence, splitting and shuffling."""

from .generate import DEFAULT_LENGTH_WEIGHTS, CorpusConfig, generate_corpus, shuffle_instance
from .io import (
    CorpusFormatError,
    CorpusParseError,
    SplitError,
    load_corpus,
    save_corpus,
    split_corpus,
)
from .service import (
    AuthError,
    DimensionMismatchError,
    EmbedServiceError,
    TransportError,
    fetch_embeddings,
)
from .types import MAX_PAGES, MIN_PAGES, Document, LengthBucket, ShuffledInstance, bucket_of

__all__ = [
    "CorpusConfig",
    "DEFAULT_LENGTH_WEIGHTS",
    "generate_corpus",
    "shuffle_instance",
    "save_corpus",
    "load_corpus",
    "split_corpus",
    "CorpusParseError",
    "CorpusFormatError",
    "SplitError",
    "Document",
    "ShuffledInstance",
    "LengthBucket",
    "bucket_of",
    "MIN_PAGES",
    "MAX_PAGES",
    "fetch_embeddings",
    "EmbedServiceError",
    "AuthError",
    "DimensionMismatchError",
    "TransportError",
]

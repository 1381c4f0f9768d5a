"""Pairwise ranking transformer: score every ordered page pair, aggregate.

The encoder adds no positional signal, so slot order cannot leak into the
scores; for every ordered pair (i, j) the scorer reads the difference of
the contextualized embeddings and outputs how strongly j should follow i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..numcore import Tensor, no_grad
from .base import Model, ModelConfig
from .transformer import build_encoder, run_encoder

__all__ = ["PairwiseScores", "PairwiseRankModel", "aggregate_scores"]

SCORER_LAYERS = 4


@dataclass
class PairwiseScores:
    """s[i, j] = strength that page j comes after page i; diagonal unused."""

    n: int
    s: np.ndarray

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=np.float64)
        if self.s.shape != (self.n, self.n):
            raise DomainError(f"score matrix shape {self.s.shape} != ({self.n}, {self.n})")
        off_diag = self.s[~np.eye(self.n, dtype=bool)]
        if not np.isfinite(off_diag).all():
            raise DomainError("pairwise scores contain non-finite entries")


def aggregate_scores(scores: PairwiseScores, descending: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Turn the pairwise matrix into per-page position scores and an ordering.

    score_i = mean_j s[j, i] - mean_j s[i, j] with the diagonal excluded:
    evidence that pages precede i minus evidence that pages follow i, so
    early pages score low. The default sorts ascending; ``descending``
    flips it (a literal reading that places high scores first).
    """
    if scores.n < 2:
        raise DomainError("aggregation needs at least 2 pages")
    s = scores.s.copy()
    np.fill_diagonal(s, 0.0)
    n = scores.n
    position_scores = s.sum(axis=0) / n - s.sum(axis=1) / n
    keys = -position_scores if descending else position_scores
    ordering = np.argsort(keys, kind="stable").astype(np.int64)
    return position_scores, ordering


class PairwiseRankModel(Model):
    """Transformer encoder plus a 4-layer difference scorer."""

    def __init__(self, config: ModelConfig, dtype=np.float32):
        super().__init__(config, dtype)
        h = config.hidden_dim
        self._glorot("input.w", (config.input_dim, h))
        self._zeros("input.b", h)
        build_encoder(self, "enc", h, config.layers)
        for i in range(SCORER_LAYERS - 1):
            self._glorot(f"scorer.w{i}", (h, h))
            self._zeros(f"scorer.b{i}", h)
        self._glorot(f"scorer.w{SCORER_LAYERS - 1}", (h, 1))
        self._zeros(f"scorer.b{SCORER_LAYERS - 1}", 1)

    def encode(self, pages: Tensor) -> tuple[Tensor, list[Tensor]]:
        x = pages @ self.params["input.w"] + self.params["input.b"]
        return run_encoder(self, "enc", x, self.config.layers, self.config.heads)

    def score_matrix(self, pages: Tensor) -> tuple[Tensor, list[Tensor]]:
        """Full (batch, n, n) score tensor in one pass."""
        encoded, attns = self.encode(pages)
        b, n, h = encoded.shape
        diff = encoded.reshape(b, 1, n, h) - encoded.reshape(b, n, 1, h)  # [b, i, j] = enc_j - enc_i
        x = diff
        for i in range(SCORER_LAYERS - 1):
            x = (x @ self.params[f"scorer.w{i}"] + self.params[f"scorer.b{i}"]).relu()
        x = x @ self.params[f"scorer.w{SCORER_LAYERS - 1}"] + self.params[f"scorer.b{SCORER_LAYERS - 1}"]
        return x.reshape(b, n, n), attns

    def pairwise_scores(self, pages: np.ndarray) -> tuple[PairwiseScores, list[np.ndarray]]:
        pages = self._as_input(pages)
        n = pages.shape[0]
        with no_grad():
            s, attns = self.score_matrix(Tensor(pages.reshape(1, n, -1)))
        return PairwiseScores(n=n, s=s.data[0].astype(np.float64)), [a.data[0] for a in attns]

    def encoder_attention(self, pages: np.ndarray) -> np.ndarray:
        """Stacked self-attention weights, shape (layers, heads, n, n)."""
        pages = self._as_input(pages)
        n = pages.shape[0]
        with no_grad():
            _, attns = self.encode(Tensor(pages.reshape(1, n, -1)))
        return np.stack([a.data[0] for a in attns])

    def order(self, pages: np.ndarray, descending: bool = False) -> np.ndarray:
        scores, _ = self.pairwise_scores(pages)
        _, ordering = aggregate_scores(scores, descending=descending)
        return ordering

"""Bidirectional recurrent position scorer.

Reads all pages at once and predicts a scalar position score per page;
sorting the scores ascending yields the ordering. No sequential decoding.
"""

from __future__ import annotations

import numpy as np

from ..numcore import LstmParams, Tensor, bidirectional_encode, no_grad
from .base import Model, ModelConfig

__all__ = ["BilstmPositionModel", "ordering_from_scores"]


def ordering_from_scores(scores: np.ndarray) -> np.ndarray:
    """Slots sorted ascending by score; ties keep the lower slot first."""
    return np.argsort(np.asarray(scores), kind="stable").astype(np.int64)


class BilstmPositionModel(Model):
    def __init__(self, config: ModelConfig, dtype=np.float32):
        super().__init__(config, dtype)
        h = config.hidden_dim
        self._cells: list[tuple[LstmParams, LstmParams]] = []
        in_dim = config.input_dim
        for i in range(config.layers):
            fwd = self._lstm(f"layer{i}.fwd", in_dim, h)
            bwd = self._lstm(f"layer{i}.bwd", in_dim, h)
            self._cells.append((fwd, bwd))
            in_dim = 2 * h
        self._glorot("head.w", (2 * h, 1))
        self._zeros("head.b", 1)

    def _lstm(self, prefix: str, in_dim: int, hidden: int) -> LstmParams:
        params = LstmParams.create(self._rng.split(prefix), in_dim, hidden, dtype=self.dtype)
        for name, tensor in params.tensors().items():
            self.params[f"{prefix}.{name}"] = tensor
        return params

    def position_scores(self, pages: Tensor) -> Tensor:
        """(batch, n) scalar scores; low score means early page."""
        x = pages
        for fwd, bwd in self._cells:
            x = bidirectional_encode(x, fwd, bwd)
        out = x @ self.params["head.w"] + self.params["head.b"]
        return out.reshape(out.shape[0], out.shape[1])

    def order(self, pages: np.ndarray) -> np.ndarray:
        pages = self._as_input(pages)
        n = pages.shape[0]
        with no_grad():
            scores = self.position_scores(Tensor(pages.reshape(1, n, -1))).data[0]
        return ordering_from_scores(scores)

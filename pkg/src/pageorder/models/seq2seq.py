"""Encoder-decoder transformer that emits one input slot per step.

The decoder does not own a vocabulary: a cross-attention pointer head
scores every input slot and previously emitted slots are masked out at
inference, so the output is always a valid permutation. The positional
encoding added to encoder inputs (by slot) and decoder inputs (by step)
is selectable: learned table, fixed sinusoidal waves, or none.
"""

from __future__ import annotations

import numpy as np

from ..numcore import Tensor, embedding_lookup, no_grad, sinusoidal_positions
from .base import LengthError, Model, ModelConfig, PeVariant
from .pointer import NEG_INF, _batch_select, _used_slot_mask
from .transformer import build_decoder, build_encoder, causal_mask, run_decoder, run_encoder

__all__ = ["Seq2SeqModel"]


class Seq2SeqModel(Model):
    def __init__(self, config: ModelConfig, dtype=np.float32):
        super().__init__(config, dtype)
        h = config.hidden_dim
        self._glorot("input.w", (config.input_dim, h))
        self._zeros("input.b", h)
        if config.pe_variant is PeVariant.LEARNED:
            self._normal("pe.table", (config.max_len, h), std=0.02)
        self._sin_table = sinusoidal_positions(config.max_len, h, dtype=dtype)
        build_encoder(self, "enc", h, config.layers)
        build_decoder(self, "dec", h, config.layers)
        self._normal("dec.start", h, std=0.1)
        self._glorot("ptr.wq", (h, h))
        self._glorot("ptr.wk", (h, h))

    def _check_len(self, n: int) -> None:
        if n > self.config.max_len:
            raise LengthError(f"{n} pages exceed the supported maximum of {self.config.max_len} positions")

    def _positions(self, n: int) -> Tensor | None:
        """Position signal for slots/steps 0..n-1 under the active variant."""
        self._check_len(n)
        variant = self.config.pe_variant
        if variant is PeVariant.LEARNED:
            return embedding_lookup(self.params["pe.table"], np.arange(n))
        if variant is PeVariant.SINUSOIDAL:
            return Tensor(self._sin_table[:n])
        return None

    def encode(self, pages: Tensor) -> tuple[Tensor, list[Tensor]]:
        n = pages.shape[-2]
        x = pages @ self.params["input.w"] + self.params["input.b"]
        pe = self._positions(n)
        if pe is not None:
            x = x + pe
        return run_encoder(self, "enc", x, self.config.layers, self.config.heads)

    def _decode_states(self, memory: Tensor, dec_inputs: Tensor) -> Tensor:
        steps = dec_inputs.shape[-2]
        pe = self._positions(steps)
        x = dec_inputs if pe is None else dec_inputs + pe
        return run_decoder(self, "dec", x, memory, self.config.layers, self.config.heads, causal_mask(steps))

    def _pointer_logits(self, dec_states: Tensor, memory: Tensor) -> Tensor:
        q = dec_states @ self.params["ptr.wq"]
        k = memory @ self.params["ptr.wk"]
        kt = k.transpose(tuple(range(k.ndim - 2)) + (k.ndim - 1, k.ndim - 2))
        return (q @ kt) * (1.0 / np.sqrt(self.config.hidden_dim))

    def teacher_logits(self, pages: Tensor, truth_rank: np.ndarray) -> tuple[Tensor, np.ndarray, np.ndarray]:
        """Teacher-forced pointer logits (batch, steps, slots) plus labels and mask."""
        b, n = pages.shape[0], pages.shape[1]
        memory, _ = self.encode(pages)
        sel = np.argsort(truth_rank, axis=-1, kind="stable")
        start = self.params["dec.start"].reshape(1, 1, self.config.hidden_dim) + Tensor(
            np.zeros((b, 1, self.config.hidden_dim), dtype=self.dtype)
        )
        if n > 1:
            from ..numcore import concat

            prev = _batch_select(memory, sel[:, :-1])
            dec_inputs = concat([start, prev], axis=1)
        else:
            dec_inputs = start
        dec_states = self._decode_states(memory, dec_inputs)
        logits = self._pointer_logits(dec_states, memory)
        return logits, sel, _used_slot_mask(sel, n)

    def order_with_attention(self, pages: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Greedy decode; returns (ordering, encoder attention stack, per-step pre-mask logits)."""
        pages = self._as_input(pages)
        n = pages.shape[0]
        self._check_len(n)
        h = self.config.hidden_dim
        with no_grad():
            memory, enc_attns = self.encode(Tensor(pages.reshape(1, n, -1)))
            chosen: list[int] = []
            available = np.ones(n, dtype=bool)
            raw_logits = np.zeros((n, n), dtype=np.float64)
            inputs = [self.params["dec.start"].reshape(1, 1, h)]
            for t in range(n):
                if len(inputs) == 1:
                    dec_inputs = inputs[0]
                else:
                    from ..numcore import concat

                    dec_inputs = concat(inputs, axis=1)
                dec_states = self._decode_states(memory, dec_inputs)
                logits = self._pointer_logits(dec_states, memory).data[0, -1].copy()
                raw_logits[t] = logits
                logits[~available] = NEG_INF
                pick = int(np.argmax(logits))
                chosen.append(pick)
                available[pick] = False
                inputs.append(memory[:, pick : pick + 1, :])
        attn_stack = np.stack([a.data[0] for a in enc_attns])
        return np.asarray(chosen, dtype=np.int64), attn_stack, raw_logits

    def encoder_attention(self, pages: np.ndarray) -> np.ndarray:
        pages = self._as_input(pages)
        n = pages.shape[0]
        with no_grad():
            _, attns = self.encode(Tensor(pages.reshape(1, n, -1)))
        return np.stack([a.data[0] for a in attns])

    def order(self, pages: np.ndarray) -> np.ndarray:
        ordering, _, _ = self.order_with_attention(pages)
        return ordering

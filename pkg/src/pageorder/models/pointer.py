"""Pointer decoders: select one remaining page per step.

Both variants emit, at every step, a score for each not-yet-chosen slot
and pick the argmax (ties to the lowest slot), so the output is a valid
permutation by construction. The feedforward variant conditions only on
the most recent selection; the recurrent variant carries a hidden state
across all previous selections.
"""

from __future__ import annotations

import numpy as np

from ..numcore import LstmParams, Tensor, bidirectional_encode, no_grad, stack
from .base import Model, ModelConfig

__all__ = ["PointerMlpModel", "PointerLstmModel"]

NEG_INF = -1e30


def _batch_select(encoded: Tensor, sel: np.ndarray) -> Tensor:
    """Gather encoded[b, sel[b, t]] -> (batch, T, h)."""
    b = sel.shape[0]
    return encoded[np.arange(b)[:, None], sel]


def _used_slot_mask(sel: np.ndarray, n: int) -> np.ndarray:
    """valid[b, t, j] is True when slot j is still available at step t."""
    b, steps = sel.shape
    valid = np.ones((b, steps, n), dtype=bool)
    for t in range(1, steps):
        valid[:, t, :] = valid[:, t - 1, :]
        valid[np.arange(b), t, sel[:, t - 1]] = False
    return valid


class PointerMlpModel(Model):
    """Feedforward pointer: no memory of selections before the last one."""

    def __init__(self, config: ModelConfig, dtype=np.float32):
        super().__init__(config, dtype)
        h = config.hidden_dim
        in_dim = config.input_dim
        for i in range(config.layers):
            self._glorot(f"enc.w{i}", (in_dim, h))
            self._zeros(f"enc.b{i}", h)
            in_dim = h
        self._glorot("update.w0", (h, h))
        self._zeros("update.b0", h)
        self._glorot("update.w1", (h, h))
        self._zeros("update.b1", h)

    def encode(self, pages: Tensor) -> Tensor:
        x = pages
        for i in range(self.config.layers):
            x = x @ self.params[f"enc.w{i}"] + self.params[f"enc.b{i}"]
            if i < self.config.layers - 1:
                x = x.relu()
        return x

    def _next_state(self, selected: Tensor) -> Tensor:
        hidden = (selected @ self.params["update.w0"] + self.params["update.b0"]).relu()
        return hidden @ self.params["update.w1"] + self.params["update.b1"]

    def _logits_from_state(self, state: Tensor, encoded: Tensor) -> Tensor:
        # (batch, h) x (batch, n, h) -> (batch, n) scaled dot product;
        # multiply-and-reduce keeps identical slots bitwise identical so
        # the tie rule can act on truly equal logits
        h = self.config.hidden_dim
        prods = encoded * state.reshape(state.shape[0], 1, h)
        return prods.sum(axis=-1) * (1.0 / np.sqrt(h))

    def teacher_logits(self, pages: Tensor, truth_rank: np.ndarray) -> tuple[Tensor, np.ndarray, np.ndarray]:
        """Teacher-forced step logits over all slots, labels, and candidate mask."""
        b, n = pages.shape[0], pages.shape[1]
        encoded = self.encode(pages)
        sel = np.argsort(truth_rank, axis=-1, kind="stable")  # slot of rank t at column t
        mean_state = encoded.mean(axis=1)
        states = [mean_state]
        if n > 1:
            prev = self._next_state(_batch_select(encoded, sel[:, :-1]))
            for t in range(n - 1):
                states.append(prev[:, t, :])
        state_seq = stack(states, axis=1)  # (b, n, h)
        kt = encoded.transpose((0, 2, 1))
        logits = (state_seq @ kt) * (1.0 / np.sqrt(self.config.hidden_dim))
        return logits, sel, _used_slot_mask(sel, n)

    def order(self, pages: np.ndarray) -> np.ndarray:
        pages = self._as_input(pages)
        n = pages.shape[0]
        with no_grad():
            encoded = self.encode(Tensor(pages.reshape(1, n, -1)))
            state = encoded.mean(axis=1)
            chosen: list[int] = []
            available = np.ones(n, dtype=bool)
            for _ in range(n):
                logits = self._logits_from_state(state, encoded).data[0].copy()
                logits[~available] = NEG_INF
                pick = int(np.argmax(logits))
                chosen.append(pick)
                available[pick] = False
                state = self._next_state(encoded[:, pick, :])
        return np.asarray(chosen, dtype=np.int64)


class PointerLstmModel(Model):
    """Recurrent pointer: bidirectional encoder, additive attention decoder."""

    def __init__(self, config: ModelConfig, dtype=np.float32):
        super().__init__(config, dtype)
        h = config.hidden_dim
        enc_out = 2 * h
        self._enc_fwd = self._lstm("enc.fwd", config.input_dim, h)
        self._enc_bwd = self._lstm("enc.bwd", config.input_dim, h)
        self._dec = self._lstm("dec", enc_out, enc_out)
        self._normal("dec.start", enc_out, std=0.1)
        self._glorot("attn.w_enc", (enc_out, h))
        self._glorot("attn.w_dec", (enc_out, h))
        self._zeros("attn.b", h)
        self._glorot("attn.v", (h, 1))

    def _lstm(self, prefix: str, in_dim: int, hidden: int) -> LstmParams:
        params = LstmParams.create(self._rng.split(prefix), in_dim, hidden, dtype=self.dtype)
        for name, tensor in params.tensors().items():
            self.params[f"{prefix}.{name}"] = tensor
        return params

    def encode(self, pages: Tensor) -> Tensor:
        return bidirectional_encode(pages, self._enc_fwd, self._enc_bwd)

    def _attention_logits(self, encoded_proj: Tensor, encoded: Tensor, h_dec: Tensor) -> Tensor:
        # additive attention: v . tanh(W_enc enc_j + W_dec h)
        b, n = encoded.shape[0], encoded.shape[1]
        hidden = self.config.hidden_dim
        query = h_dec @ self.params["attn.w_dec"] + self.params["attn.b"]
        scores = (encoded_proj + query.reshape(b, 1, hidden)).tanh() @ self.params["attn.v"]
        return scores.reshape(b, n)

    def teacher_logits(self, pages: Tensor, truth_rank: np.ndarray) -> tuple[Tensor, np.ndarray, np.ndarray]:
        b, n = pages.shape[0], pages.shape[1]
        encoded = self.encode(pages)
        encoded_proj = encoded @ self.params["attn.w_enc"]
        sel = np.argsort(truth_rank, axis=-1, kind="stable")
        enc_out = 2 * self.config.hidden_dim
        start = self.params["dec.start"].reshape(1, enc_out) + Tensor(
            np.zeros((b, enc_out), dtype=self.dtype)
        )
        h = Tensor(np.zeros((b, enc_out), dtype=self.dtype))
        c = Tensor(np.zeros((b, enc_out), dtype=self.dtype))
        inputs = [start]
        if n > 1:
            prev_pages = _batch_select(encoded, sel[:, :-1])
            inputs.extend(prev_pages[:, t, :] for t in range(n - 1))
        step_logits = []
        from ..numcore import lstm_cell

        for t in range(n):
            h, c = lstm_cell(inputs[t], h, c, self._dec)
            step_logits.append(self._attention_logits(encoded_proj, encoded, h))
        logits = stack(step_logits, axis=1)
        return logits, sel, _used_slot_mask(sel, n)

    def order(self, pages: np.ndarray) -> np.ndarray:
        pages = self._as_input(pages)
        n = pages.shape[0]
        from ..numcore import lstm_cell

        with no_grad():
            encoded = self.encode(Tensor(pages.reshape(1, n, -1)))
            encoded_proj = encoded @ self.params["attn.w_enc"]
            enc_out = 2 * self.config.hidden_dim
            x = self.params["dec.start"].reshape(1, enc_out)
            h = Tensor(np.zeros((1, enc_out), dtype=self.dtype))
            c = Tensor(np.zeros((1, enc_out), dtype=self.dtype))
            chosen: list[int] = []
            available = np.ones(n, dtype=bool)
            for _ in range(n):
                h, c = lstm_cell(x, h, c, self._dec)
                logits = self._attention_logits(encoded_proj, encoded, h).data[0].copy()
                logits[~available] = NEG_INF
                pick = int(np.argmax(logits))
                chosen.append(pick)
                available[pick] = False
                x = encoded[:, pick, :]
        return np.asarray(chosen, dtype=np.int64)

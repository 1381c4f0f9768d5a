"""Neural building blocks composed from tensor primitives.

Everything here works on unbatched ``(n, d)`` inputs as well as batched
``(batch, n, d)`` inputs; weight matrices broadcast over leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConfigError
from .rng import RngStream
from .tensor import Tensor, concat, softmax, stack

__all__ = [
    "glorot_uniform",
    "linear",
    "layer_norm",
    "multi_head_attention",
    "LstmParams",
    "lstm_cell",
    "bidirectional_encode",
    "sinusoidal_positions",
]


def glorot_uniform(rng: RngStream, shape: tuple[int, int], dtype=np.float32) -> np.ndarray:
    fan_in, fan_out = shape[0], shape[-1]
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(shape, -limit, limit, dtype=dtype)


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """x @ weight + bias with weight of shape (in_dim, out_dim)."""
    out = x @ weight
    if bias is not None:
        out = out + bias
    return out


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize over the last axis, then scale and shift."""
    mu = x.mean(axis=-1, keepdims=True)
    centered = x - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    normed = centered * (var + eps) ** -0.5
    return normed * gain + bias


def multi_head_attention(
    q: Tensor,
    k: Tensor,
    v: Tensor,
    heads: int,
    mask: np.ndarray | None = None,
) -> tuple[Tensor, Tensor]:
    """Scaled dot-product attention split into ``heads`` subspaces.

    ``q``, ``k``, ``v`` have shape ``(..., n, d)`` with ``d`` divisible by
    ``heads``. ``mask`` is boolean, True where attending is allowed, and
    broadcasts against the score shape ``(..., heads, n_q, n_k)``.

    Returns the merged output ``(..., n, d)`` and the attention weights
    ``(..., heads, n_q, n_k)`` for locality analysis.
    """
    d = q.shape[-1]
    if d % heads != 0:
        raise ConfigError(f"model width {d} is not divisible by {heads} heads")
    dh = d // heads

    def split_heads(t: Tensor) -> Tensor:
        n = t.shape[-2]
        lead = t.shape[:-2]
        parted = t.reshape(*lead, n, heads, dh)
        axes = tuple(range(len(lead))) + (len(lead) + 1, len(lead), len(lead) + 2)
        return parted.transpose(axes)

    qh, kh, vh = split_heads(q), split_heads(k), split_heads(v)
    kt_axes = tuple(range(kh.ndim - 2)) + (kh.ndim - 1, kh.ndim - 2)
    scores = (qh @ kh.transpose(kt_axes)) * (1.0 / np.sqrt(dh))
    attn = softmax(scores, mask=None if mask is None else np.asarray(mask, dtype=bool))
    mixed = attn @ vh

    lead = q.shape[:-2]
    back_axes = tuple(range(len(lead))) + (len(lead) + 1, len(lead), len(lead) + 2)
    merged = mixed.transpose(back_axes).reshape(*lead, q.shape[-2], d)
    return merged, attn


@dataclass
class LstmParams:
    """Gate weights for one recurrent cell: wx (d_in, 4H), wh (H, 4H), b (4H,)."""

    wx: Tensor
    wh: Tensor
    b: Tensor

    @property
    def hidden(self) -> int:
        return self.wh.shape[0]

    @staticmethod
    def create(rng: RngStream, input_dim: int, hidden: int, dtype=np.float32) -> "LstmParams":
        wx = Tensor(glorot_uniform(rng.split("wx"), (input_dim, 4 * hidden), dtype), requires_grad=True)
        wh = Tensor(glorot_uniform(rng.split("wh"), (hidden, 4 * hidden), dtype), requires_grad=True)
        bias = np.zeros(4 * hidden, dtype=dtype)
        bias[hidden : 2 * hidden] = 1.0  # forget gate open at init
        b = Tensor(bias, requires_grad=True)
        return LstmParams(wx, wh, b)

    def tensors(self) -> dict[str, Tensor]:
        return {"wx": self.wx, "wh": self.wh, "b": self.b}


def lstm_cell(x: Tensor, h: Tensor, c: Tensor, params: LstmParams) -> tuple[Tensor, Tensor]:
    """One gated-recurrence step; gate order i, f, g, o."""
    hidden = params.hidden
    z = x @ params.wx + h @ params.wh + params.b
    i = z[..., :hidden].sigmoid()
    f = z[..., hidden : 2 * hidden].sigmoid()
    g = z[..., 2 * hidden : 3 * hidden].tanh()
    o = z[..., 3 * hidden :].sigmoid()
    c_next = f * c + i * g
    h_next = o * c_next.tanh()
    return h_next, c_next


def _run_direction(seq: Tensor, params: LstmParams, reverse: bool) -> list[Tensor]:
    batch, n = seq.shape[0], seq.shape[1]
    hidden = params.hidden
    h = Tensor(np.zeros((batch, hidden), dtype=seq.data.dtype))
    c = Tensor(np.zeros((batch, hidden), dtype=seq.data.dtype))
    order = range(n - 1, -1, -1) if reverse else range(n)
    outputs: list[Tensor | None] = [None] * n
    for t in order:
        h, c = lstm_cell(seq[:, t, :], h, c, params)
        outputs[t] = h
    return outputs  # type: ignore[return-value]


def bidirectional_encode(seq: Tensor, forward: LstmParams, backward: LstmParams) -> Tensor:
    """Concatenate forward and backward recurrent states per position.

    ``seq`` is ``(n, d)`` or ``(batch, n, d)``; output appends a ``2H``
    channel axis in the same layout.
    """
    squeeze = seq.ndim == 2
    if squeeze:
        seq = seq.reshape(1, *seq.shape)
    fwd = _run_direction(seq, forward, reverse=False)
    bwd = _run_direction(seq, backward, reverse=True)
    per_step = [concat([f, b], axis=-1) for f, b in zip(fwd, bwd)]
    out = stack(per_step, axis=1)
    if squeeze:
        out = out.reshape(out.shape[1], out.shape[2])
    return out


def sinusoidal_positions(n_positions: int, dim: int, dtype=np.float32) -> np.ndarray:
    """Fixed wave-pattern position signals.

    Channel 2i holds sin(pos / 10000^(2i/dim)), channel 2i+1 the matching
    cosine, so position 0 encodes as alternating 0s and 1s.
    """
    positions = np.arange(n_positions, dtype=np.float64)[:, None]
    channel = np.arange(dim, dtype=np.float64)[None, :]
    rates = np.power(10000.0, -2.0 * np.floor(channel / 2.0) / dim)
    angles = positions * rates
    table = np.where(channel % 2 == 0, np.sin(angles), np.cos(angles))
    return table.astype(dtype)

"""Pre-norm transformer blocks bound to a model's parameter registry."""

from __future__ import annotations

import numpy as np

from ..numcore import Tensor, layer_norm, multi_head_attention

FFN_MULT = 4


def build_encoder(model, prefix: str, width: int, layers: int) -> None:
    for i in range(layers):
        p = f"{prefix}.layer{i}"
        model._ones(f"{p}.ln1.g", width)
        model._zeros(f"{p}.ln1.b", width)
        for proj in ("wq", "wk", "wv", "wo"):
            model._glorot(f"{p}.{proj}", (width, width))
        model._ones(f"{p}.ln2.g", width)
        model._zeros(f"{p}.ln2.b", width)
        model._glorot(f"{p}.ffn.w1", (width, FFN_MULT * width))
        model._zeros(f"{p}.ffn.b1", FFN_MULT * width)
        model._glorot(f"{p}.ffn.w2", (FFN_MULT * width, width))
        model._zeros(f"{p}.ffn.b2", width)
    model._ones(f"{prefix}.ln_out.g", width)
    model._zeros(f"{prefix}.ln_out.b", width)


def run_encoder(
    model, prefix: str, x: Tensor, layers: int, heads: int, mask: np.ndarray | None = None
) -> tuple[Tensor, list[Tensor]]:
    """Self-attention stack; returns final states and per-layer attention."""
    params = model.params
    attns: list[Tensor] = []
    for i in range(layers):
        p = f"{prefix}.layer{i}"
        h = layer_norm(x, params[f"{p}.ln1.g"], params[f"{p}.ln1.b"])
        q = h @ params[f"{p}.wq"]
        k = h @ params[f"{p}.wk"]
        v = h @ params[f"{p}.wv"]
        mixed, attn = multi_head_attention(q, k, v, heads, mask=mask)
        attns.append(attn)
        x = x + mixed @ params[f"{p}.wo"]
        h2 = layer_norm(x, params[f"{p}.ln2.g"], params[f"{p}.ln2.b"])
        ffn = (h2 @ params[f"{p}.ffn.w1"] + params[f"{p}.ffn.b1"]).relu()
        x = x + ffn @ params[f"{p}.ffn.w2"] + params[f"{p}.ffn.b2"]
    return layer_norm(x, params[f"{prefix}.ln_out.g"], params[f"{prefix}.ln_out.b"]), attns


def build_decoder(model, prefix: str, width: int, layers: int) -> None:
    for i in range(layers):
        p = f"{prefix}.layer{i}"
        model._ones(f"{p}.ln1.g", width)
        model._zeros(f"{p}.ln1.b", width)
        for proj in ("self.wq", "self.wk", "self.wv", "self.wo"):
            model._glorot(f"{p}.{proj}", (width, width))
        model._ones(f"{p}.ln2.g", width)
        model._zeros(f"{p}.ln2.b", width)
        for proj in ("cross.wq", "cross.wk", "cross.wv", "cross.wo"):
            model._glorot(f"{p}.{proj}", (width, width))
        model._ones(f"{p}.ln3.g", width)
        model._zeros(f"{p}.ln3.b", width)
        model._glorot(f"{p}.ffn.w1", (width, FFN_MULT * width))
        model._zeros(f"{p}.ffn.b1", FFN_MULT * width)
        model._glorot(f"{p}.ffn.w2", (FFN_MULT * width, width))
        model._zeros(f"{p}.ffn.b2", width)
    model._ones(f"{prefix}.ln_out.g", width)
    model._zeros(f"{prefix}.ln_out.b", width)


def run_decoder(
    model,
    prefix: str,
    x: Tensor,
    memory: Tensor,
    layers: int,
    heads: int,
    causal_mask: np.ndarray,
) -> Tensor:
    """Causal self-attention plus cross-attention over encoder memory."""
    params = model.params
    for i in range(layers):
        p = f"{prefix}.layer{i}"
        h = layer_norm(x, params[f"{p}.ln1.g"], params[f"{p}.ln1.b"])
        q = h @ params[f"{p}.self.wq"]
        k = h @ params[f"{p}.self.wk"]
        v = h @ params[f"{p}.self.wv"]
        mixed, _ = multi_head_attention(q, k, v, heads, mask=causal_mask)
        x = x + mixed @ params[f"{p}.self.wo"]

        h2 = layer_norm(x, params[f"{p}.ln2.g"], params[f"{p}.ln2.b"])
        qc = h2 @ params[f"{p}.cross.wq"]
        kc = memory @ params[f"{p}.cross.wk"]
        vc = memory @ params[f"{p}.cross.wv"]
        mixed_c, _ = multi_head_attention(qc, kc, vc, heads)
        x = x + mixed_c @ params[f"{p}.cross.wo"]

        h3 = layer_norm(x, params[f"{p}.ln3.g"], params[f"{p}.ln3.b"])
        ffn = (h3 @ params[f"{p}.ffn.w1"] + params[f"{p}.ffn.b1"]).relu()
        x = x + ffn @ params[f"{p}.ffn.w2"] + params[f"{p}.ffn.b2"]
    return layer_norm(x, params[f"{prefix}.ln_out.g"], params[f"{prefix}.ln_out.b"])


def causal_mask(n: int) -> np.ndarray:
    """True where query position may attend (keys at or before it)."""
    return np.tril(np.ones((n, n), dtype=bool))

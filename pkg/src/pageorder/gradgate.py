"""Gradient gate: central-difference verification of every layer and loss.

Runs in 64-bit mode on tiny toy inputs (documents of at most 5 pages).
Used by the command-line gradcheck gate and the acceptance suite.
"""

from __future__ import annotations

import numpy as np

from .models import Arch, ModelConfig, build_model
from .numcore import (
    GradCheckReport,
    LstmParams,
    RngStream,
    Tensor,
    embedding_lookup,
    grad_check,
    layer_norm,
    lstm_cell,
    multi_head_attention,
)
from .training import loss_pairwise, loss_pointer, loss_position, make_pairwise_targets

__all__ = ["run_gradient_gate", "GateResult"]

DIM = 10


class GateResult:
    """Named gradient-check reports with a combined pass flag."""

    def __init__(self):
        self.reports: list[tuple[str, GradCheckReport]] = []

    def add(self, name: str, report: GradCheckReport) -> None:
        self.reports.append((name, report))

    @property
    def passed(self) -> bool:
        return all(r.passed for _, r in self.reports)

    def summary(self) -> str:
        lines = []
        for name, report in self.reports:
            flag = "pass" if report.passed else "FAIL"
            lines.append(f"{name:<18} max rel err {report.max_rel_error:.3e}  {flag}")
        return "\n".join(lines)


def _t64(rng: RngStream, shape) -> Tensor:
    return Tensor(rng.normal(shape, dtype=np.float64), requires_grad=True)


def _tiny_model(arch: Arch, seed: int = 13):
    cfg = ModelConfig(arch=arch, input_dim=DIM, hidden_dim=8, layers=1, heads=2, seed=seed)
    return build_model(cfg, dtype=np.float64)


def run_gradient_gate(tolerance: float = 1e-3, epsilon: float = 1e-5) -> GateResult:
    result = GateResult()
    rng = RngStream(2024)

    # dense layer
    x = _t64(rng.split("dense.x"), (3, DIM))
    w = _t64(rng.split("dense.w"), (DIM, 6))
    b = _t64(rng.split("dense.b"), 6)
    result.add(
        "dense",
        grad_check(lambda: ((x @ w + b).relu() ** 2.0).sum(), [("x", x), ("w", w), ("b", b)], epsilon, tolerance),
    )

    # recurrent cell
    cell = LstmParams(
        wx=_t64(rng.split("lstm.wx"), (DIM, 16)),
        wh=_t64(rng.split("lstm.wh"), (4, 16)),
        b=_t64(rng.split("lstm.b"), 16),
    )
    xc = _t64(rng.split("lstm.x"), (2, DIM))
    h0 = Tensor(np.zeros((2, 4), dtype=np.float64))
    c0 = Tensor(np.zeros((2, 4), dtype=np.float64))

    def lstm_fn():
        h, c = lstm_cell(xc, h0, c0, cell)
        return (h * h).sum() + c.sum()

    result.add(
        "recurrent_cell",
        grad_check(lstm_fn, [("wx", cell.wx), ("wh", cell.wh), ("b", cell.b), ("x", xc)], epsilon, tolerance),
    )

    # attention
    q = _t64(rng.split("attn.q"), (4, 8))
    k = _t64(rng.split("attn.k"), (4, 8))
    v = _t64(rng.split("attn.v"), (4, 8))

    def attn_fn():
        out, attn = multi_head_attention(q, k, v, heads=2)
        return (out * out).sum() + attn.sum(axis=-1).mean()

    result.add("attention", grad_check(attn_fn, [("q", q), ("k", k), ("v", v)], epsilon, tolerance))

    # layer norm
    xn = _t64(rng.split("ln.x"), (3, 7))
    gain = _t64(rng.split("ln.g"), 7)
    bias = _t64(rng.split("ln.b"), 7)
    result.add(
        "layer_norm",
        grad_check(lambda: (layer_norm(xn, gain, bias) ** 2.0).sum(), [("x", xn), ("g", gain), ("b", bias)], epsilon, tolerance),
    )

    # embedding lookup
    table = _t64(rng.split("emb.table"), (6, 5))
    idx = np.array([0, 3, 3, 5])
    result.add(
        "embedding_lookup",
        grad_check(lambda: (embedding_lookup(table, idx) ** 2.0).sum(), [("table", table)], epsilon, tolerance),
    )

    # pairwise ranking loss on a 3-page toy document
    pw = _tiny_model(Arch.PAIRWISE_RANK)
    pages3 = rng.split("pw.pages").normal((1, 3, DIM), dtype=np.float64)
    truth3 = np.array([[2, 0, 1]])

    def pairwise_fn():
        s, _ = pw.score_matrix(Tensor(pages3))
        return loss_pairwise(s, make_pairwise_targets(truth3)).sum()

    result.add("loss_pairwise", grad_check(pairwise_fn, pw.named_parameters(), epsilon, tolerance))

    # pointer loss through the recurrent pointer decoder, 4-page toy
    ptr = _tiny_model(Arch.POINTER_LSTM)
    pages4 = rng.split("ptr.pages").normal((1, 4, DIM), dtype=np.float64)
    truth4 = np.array([[1, 3, 0, 2]])

    def pointer_fn():
        logits, sel, valid = ptr.teacher_logits(Tensor(pages4), truth4)
        return loss_pointer(logits, sel, valid).sum()

    result.add("loss_pointer", grad_check(pointer_fn, ptr.named_parameters(), epsilon, tolerance))

    # position regression loss through the bidirectional scorer, 5-page toy
    blm = _tiny_model(Arch.BILSTM_POS)
    pages5 = rng.split("blm.pages").normal((1, 5, DIM), dtype=np.float64)
    truth5 = np.array([[4, 2, 0, 1, 3]])

    def position_fn():
        return loss_position(blm.position_scores(Tensor(pages5)), truth5).sum()

    result.add("loss_position", grad_check(position_fn, blm.named_parameters(), epsilon, tolerance))

    return result

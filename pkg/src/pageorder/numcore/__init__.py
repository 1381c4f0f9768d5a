"""Minimal dense-tensor engine: autodiff, optimizer, gradient checking."""

from .gradcheck import GradCheckReport, ParamCheck, grad_check
from .nn import (
    LstmParams,
    bidirectional_encode,
    glorot_uniform,
    layer_norm,
    linear,
    lstm_cell,
    multi_head_attention,
    sinusoidal_positions,
)
from .optim import AdamState, TrainingDivergedError, adam_step, clip_global_norm, global_norm, init_adam
from .rng import RngStream
from .tensor import (
    DegenerateMaskError,
    ShapeError,
    Tensor,
    concat,
    embedding_lookup,
    grad_enabled,
    log_softmax,
    masked_fill,
    no_grad,
    softmax,
    stack,
)

__all__ = [
    "Tensor",
    "ShapeError",
    "DegenerateMaskError",
    "no_grad",
    "grad_enabled",
    "concat",
    "stack",
    "softmax",
    "log_softmax",
    "masked_fill",
    "embedding_lookup",
    "RngStream",
    "glorot_uniform",
    "linear",
    "layer_norm",
    "multi_head_attention",
    "LstmParams",
    "lstm_cell",
    "bidirectional_encode",
    "sinusoidal_positions",
    "AdamState",
    "TrainingDivergedError",
    "init_adam",
    "adam_step",
    "clip_global_norm",
    "global_norm",
    "grad_check",
    "GradCheckReport",
    "ParamCheck",
]

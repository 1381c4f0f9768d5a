"""Model configuration and the shared parameter-registry base class."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from ..errors import ConfigError
from ..numcore import RngStream, Tensor, glorot_uniform

__all__ = ["Arch", "PeVariant", "ModelConfig", "Model", "LengthError", "desk_config"]


class Arch(str, Enum):
    BILSTM_POS = "bilstm_pos"
    POINTER_MLP = "pointer_mlp"
    POINTER_LSTM = "pointer_lstm"
    SEQ2SEQ = "seq2seq"
    PAIRWISE_RANK = "pairwise_rank"


class PeVariant(str, Enum):
    LEARNED = "learned"
    SINUSOIDAL = "sinusoidal"
    NONE = "none"


class LengthError(ValueError):
    """A document exceeds the positions a model supports."""


@dataclass(frozen=True)
class ModelConfig:
    arch: Arch
    input_dim: int
    hidden_dim: int = 128
    layers: int = 2
    heads: int = 4
    pe_variant: PeVariant = PeVariant.LEARNED  # seq2seq only
    max_len: int = 25
    seed: int = 0

    def __post_init__(self):
        if self.hidden_dim % self.heads != 0:
            raise ConfigError(f"hidden_dim {self.hidden_dim} not divisible by heads {self.heads}")
        if self.max_len < 25:
            raise ConfigError(f"max_len must support at least 25 positions, got {self.max_len}")
        if self.layers < 1 or self.input_dim < 1:
            raise ConfigError("layers and input_dim must be positive")

    def with_seed(self, seed: int) -> "ModelConfig":
        return replace(self, seed=seed)

    def to_dict(self) -> dict:
        d = {
            "arch": self.arch.value,
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            "layers": self.layers,
            "heads": self.heads,
            "pe_variant": self.pe_variant.value,
            "max_len": self.max_len,
            "seed": self.seed,
        }
        return d

    @staticmethod
    def from_dict(d: dict) -> "ModelConfig":
        return ModelConfig(
            arch=Arch(d["arch"]),
            input_dim=int(d["input_dim"]),
            hidden_dim=int(d["hidden_dim"]),
            layers=int(d["layers"]),
            heads=int(d["heads"]),
            pe_variant=PeVariant(d["pe_variant"]),
            max_len=int(d["max_len"]),
            seed=int(d["seed"]),
        )


def desk_config(arch: Arch, input_dim: int, seed: int = 0, pe_variant: PeVariant = PeVariant.LEARNED) -> ModelConfig:
    """Laptop-scale defaults per architecture."""
    if arch is Arch.BILSTM_POS:
        return ModelConfig(arch=arch, input_dim=input_dim, hidden_dim=128, layers=2, heads=1, seed=seed)
    if arch is Arch.POINTER_MLP:
        return ModelConfig(arch=arch, input_dim=input_dim, hidden_dim=128, layers=3, heads=1, seed=seed)
    if arch is Arch.POINTER_LSTM:
        return ModelConfig(arch=arch, input_dim=input_dim, hidden_dim=128, layers=1, heads=1, seed=seed)
    if arch is Arch.SEQ2SEQ:
        return ModelConfig(
            arch=arch, input_dim=input_dim, hidden_dim=128, layers=2, heads=4, pe_variant=pe_variant, seed=seed
        )
    if arch is Arch.PAIRWISE_RANK:
        return ModelConfig(arch=arch, input_dim=input_dim, hidden_dim=128, layers=2, heads=4, seed=seed)
    raise ConfigError(f"unknown architecture {arch}")


class Model:
    """Base class: an ordered name -> Tensor parameter registry."""

    def __init__(self, config: ModelConfig, dtype=np.float32):
        self.config = config
        self.dtype = dtype
        self.params: dict[str, Tensor] = {}
        self._rng = RngStream(config.seed).split(config.arch.value)

    # -- parameter management -------------------------------------------

    def _add(self, name: str, data: np.ndarray) -> Tensor:
        if name in self.params:
            raise ConfigError(f"duplicate parameter name {name}")
        t = Tensor(np.asarray(data, dtype=self.dtype), requires_grad=True)
        self.params[name] = t
        return t

    def _glorot(self, name: str, shape: tuple[int, int]) -> Tensor:
        return self._add(name, glorot_uniform(self._rng.split(name), shape, dtype=self.dtype))

    def _zeros(self, name: str, shape) -> Tensor:
        return self._add(name, np.zeros(shape, dtype=self.dtype))

    def _ones(self, name: str, shape) -> Tensor:
        return self._add(name, np.ones(shape, dtype=self.dtype))

    def _normal(self, name: str, shape, std: float = 0.02) -> Tensor:
        return self._add(name, self._rng.split(name).normal(shape, std=std, dtype=self.dtype))

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        return list(self.params.items())

    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def param_count(self) -> int:
        return sum(p.data.size for p in self.params.values())

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self.params.items()}

    def load_state_arrays(self, state: dict[str, np.ndarray]) -> None:
        if set(state) != set(self.params):
            missing = set(self.params) ^ set(state)
            raise ConfigError(f"parameter names do not match: {sorted(missing)}")
        for name, arr in state.items():
            if self.params[name].data.shape != arr.shape:
                raise ConfigError(f"shape mismatch for {name}")
            self.params[name].data = arr.astype(self.dtype, copy=True)

    # -- inference interface ---------------------------------------------

    def order(self, pages: np.ndarray) -> np.ndarray:
        """Predicted reading order as slot indices; implemented per arch."""
        raise NotImplementedError

    def _as_input(self, pages: np.ndarray) -> np.ndarray:
        pages = np.asarray(pages, dtype=self.dtype)
        if pages.ndim != 2:
            raise ConfigError(f"expected (n_pages, dim), got {pages.shape}")
        if pages.shape[1] != self.config.input_dim:
            raise ConfigError(f"embedding dim {pages.shape[1]} != model input_dim {self.config.input_dim}")
        return pages

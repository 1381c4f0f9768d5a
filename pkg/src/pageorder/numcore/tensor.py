"""Dense tensors with reverse-mode automatic differentiation.

Row-major numpy storage. float32 is the working precision for training and
inference; float64 is used as a reference mode by the gradient checker.
The graph is built eagerly: every operation attaches a backward closure to
its result unless recording is disabled via ``no_grad()``.
"""

from __future__ import annotations

import contextlib
from typing import Iterator, Sequence

import numpy as np

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
]


class ShapeError(ValueError):
    """Operand shapes are incompatible."""


class DegenerateMaskError(ValueError):
    """A softmax row has every entry masked out."""


_GRAD_ENABLED = True


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """Skip graph recording inside the context (inference fast path)."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def grad_enabled() -> bool:
    return _GRAD_ENABLED


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum ``grad`` down to ``shape`` (inverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    """A dense array node in the autodiff graph.

    ``data`` is the value, ``grad`` (same shape, allocated lazily) the
    accumulated gradient. Non-leaf tensors keep references to the tensors
    they were computed from plus a closure that routes the incoming
    gradient to them.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data)
        if arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(np.float32)
        self.data: np.ndarray = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    # -- introspection -------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() requires a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.data.dtype.name}, requires_grad={self.requires_grad})"

    def zero_grad(self) -> None:
        self.grad = None

    # -- graph plumbing ------------------------------------------------

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += g

    @staticmethod
    def _result(data: np.ndarray, parents: Sequence["Tensor"], backward) -> "Tensor":
        out = Tensor(data)
        if _GRAD_ENABLED and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = tuple(p for p in parents if p.requires_grad)
            out._backward = backward
        return out

    def backward(self) -> None:
        """Reverse-mode sweep from a scalar output."""
        if self.data.size != 1:
            raise ShapeError("backward() requires a scalar output")
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in visited:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None:
                node._backward(node.grad)

    # -- arithmetic ----------------------------------------------------

    def _coerce(self, other) -> "Tensor":
        if isinstance(other, Tensor):
            return other
        return Tensor(np.asarray(other, dtype=self.data.dtype))

    def __add__(self, other) -> "Tensor":
        other = self._coerce(other)
        a, b = self, other
        out_data = a.data + b.data

        def _bwd(g: np.ndarray) -> None:
            if a.requires_grad:
                a._accumulate(_unbroadcast(g, a.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(g, b.shape))

        return Tensor._result(out_data, (a, b), _bwd)

    __radd__ = __add__

    def __neg__(self) -> "Tensor":
        return self * -1.0

    def __sub__(self, other) -> "Tensor":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Tensor":
        return self._coerce(other) + (-self)

    def __mul__(self, other) -> "Tensor":
        other = self._coerce(other)
        a, b = self, other
        out_data = a.data * b.data

        def _bwd(g: np.ndarray) -> None:
            if a.requires_grad:
                a._accumulate(_unbroadcast(g * b.data, a.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(g * a.data, b.shape))

        return Tensor._result(out_data, (a, b), _bwd)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Tensor":
        if isinstance(other, Tensor):
            if other.data.size != 1:
                raise ShapeError("tensor division only supports scalar divisors")
            return self * other ** -1.0
        return self * (1.0 / float(other))

    def __pow__(self, exponent: float) -> "Tensor":
        if not isinstance(exponent, (int, float)):
            raise TypeError("only scalar exponents are supported")
        a = self
        out_data = a.data ** exponent

        def _bwd(g: np.ndarray) -> None:
            a._accumulate(g * exponent * a.data ** (exponent - 1.0))

        return Tensor._result(out_data, (a,), _bwd)

    def __matmul__(self, other) -> "Tensor":
        other = self._coerce(other)
        a, b = self, other
        if a.ndim < 2 or b.ndim < 2:
            raise ShapeError(f"matmul needs >=2-D operands, got {a.shape} @ {b.shape}")
        if a.shape[-1] != b.shape[-2]:
            raise ShapeError(f"inner dimensions mismatch: {a.shape} @ {b.shape}")
        out_data = np.matmul(a.data, b.data)

        def _bwd(g: np.ndarray) -> None:
            if a.requires_grad:
                ga = np.matmul(g, np.swapaxes(b.data, -1, -2))
                a._accumulate(_unbroadcast(ga, a.shape))
            if b.requires_grad:
                gb = np.matmul(np.swapaxes(a.data, -1, -2), g)
                b._accumulate(_unbroadcast(gb, b.shape))

        return Tensor._result(out_data, (a, b), _bwd)

    # -- reductions and views -------------------------------------------

    def sum(self, axis: int | None = None, keepdims: bool = False) -> "Tensor":
        a = self
        out_data = a.data.sum(axis=axis, keepdims=keepdims)

        def _bwd(g: np.ndarray) -> None:
            if axis is not None and not keepdims:
                g = np.expand_dims(g, axis=axis)
            a._accumulate(np.broadcast_to(g, a.shape).astype(a.data.dtype, copy=False))

        return Tensor._result(out_data, (a,), _bwd)

    def mean(self, axis: int | None = None, keepdims: bool = False) -> "Tensor":
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def reshape(self, *shape: int) -> "Tensor":
        a = self
        out_data = a.data.reshape(*shape)

        def _bwd(g: np.ndarray) -> None:
            a._accumulate(g.reshape(a.shape))

        return Tensor._result(out_data, (a,), _bwd)

    def transpose(self, axes: Sequence[int]) -> "Tensor":
        a = self
        axes = tuple(axes)
        out_data = np.transpose(a.data, axes)
        inverse = tuple(np.argsort(axes))

        def _bwd(g: np.ndarray) -> None:
            a._accumulate(np.transpose(g, inverse))

        return Tensor._result(out_data, (a,), _bwd)

    def __getitem__(self, index) -> "Tensor":
        a = self
        out_data = a.data[index]
        if not isinstance(out_data, np.ndarray):
            out_data = np.asarray(out_data, dtype=a.data.dtype)

        def _bwd(g: np.ndarray) -> None:
            if a.grad is None:
                a.grad = np.zeros_like(a.data)
            np.add.at(a.grad, index, g)

        return Tensor._result(out_data, (a,), _bwd)

    # -- elementwise functions ------------------------------------------

    def exp(self) -> "Tensor":
        a = self
        out_data = np.exp(a.data)

        def _bwd(g: np.ndarray) -> None:
            a._accumulate(g * out_data)

        return Tensor._result(out_data, (a,), _bwd)

    def log(self) -> "Tensor":
        a = self
        out_data = np.log(a.data)

        def _bwd(g: np.ndarray) -> None:
            a._accumulate(g / a.data)

        return Tensor._result(out_data, (a,), _bwd)

    def sqrt(self) -> "Tensor":
        return self ** 0.5

    def tanh(self) -> "Tensor":
        a = self
        out_data = np.tanh(a.data)

        def _bwd(g: np.ndarray) -> None:
            a._accumulate(g * (1.0 - out_data * out_data))

        return Tensor._result(out_data, (a,), _bwd)

    def sigmoid(self) -> "Tensor":
        a = self
        x = a.data
        out_data = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
        out_data = out_data.astype(x.dtype, copy=False)

        def _bwd(g: np.ndarray) -> None:
            a._accumulate(g * out_data * (1.0 - out_data))

        return Tensor._result(out_data, (a,), _bwd)

    def relu(self) -> "Tensor":
        a = self
        out_data = np.maximum(a.data, 0.0)

        def _bwd(g: np.ndarray) -> None:
            a._accumulate(g * (a.data > 0))

        return Tensor._result(out_data, (a,), _bwd)

    def softplus(self) -> "Tensor":
        """log(1 + exp(x)), computed without overflow."""
        a = self
        x = a.data
        out_data = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))

        def _bwd(g: np.ndarray) -> None:
            sig = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))), np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))
            a._accumulate(g * sig)

        return Tensor._result(out_data, (a,), _bwd)


# -- multi-tensor and masked operations ----------------------------------


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    parts = list(tensors)
    out_data = np.concatenate([t.data for t in parts], axis=axis)
    sizes = [t.data.shape[axis] for t in parts]

    def _bwd(g: np.ndarray) -> None:
        offset = 0
        for t, size in zip(parts, sizes):
            sl = [slice(None)] * g.ndim
            sl[axis] = slice(offset, offset + size)
            if t.requires_grad:
                t._accumulate(g[tuple(sl)])
            offset += size

    return Tensor._result(out_data, parts, _bwd)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    parts = list(tensors)
    out_data = np.stack([t.data for t in parts], axis=axis)

    def _bwd(g: np.ndarray) -> None:
        for i, t in enumerate(parts):
            if t.requires_grad:
                t._accumulate(np.take(g, i, axis=axis))

    return Tensor._result(out_data, parts, _bwd)


def _valid_mask(mask: np.ndarray | None, shape: tuple[int, ...]) -> np.ndarray | None:
    if mask is None:
        return None
    valid = np.broadcast_to(np.asarray(mask, dtype=bool), shape)
    if not valid.any(axis=-1).all():
        raise DegenerateMaskError("softmax row with every entry masked")
    return valid


def softmax(x: Tensor, mask: np.ndarray | None = None) -> Tensor:
    """Numerically stable softmax over the last axis.

    ``mask`` is boolean with True marking entries that participate; masked
    entries come out exactly 0. A fully masked row raises
    DegenerateMaskError.
    """
    valid = _valid_mask(mask, x.shape)
    logits = x.data if valid is None else np.where(valid, x.data, -np.inf)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    expd = np.exp(shifted)
    out_data = (expd / expd.sum(axis=-1, keepdims=True)).astype(x.data.dtype, copy=False)

    def _bwd(g: np.ndarray) -> None:
        inner = (g * out_data).sum(axis=-1, keepdims=True)
        x._accumulate(out_data * (g - inner))

    return Tensor._result(out_data, (x,), _bwd)


def log_softmax(x: Tensor, mask: np.ndarray | None = None) -> Tensor:
    """Log-softmax over the last axis; masked entries are emitted as 0.

    Only unmasked entries are meaningful; gather labels from unmasked
    positions only.
    """
    valid = _valid_mask(mask, x.shape)
    logits = x.data if valid is None else np.where(valid, x.data, -np.inf)
    peak = logits.max(axis=-1, keepdims=True)
    lse = peak + np.log(np.exp(logits - peak).sum(axis=-1, keepdims=True))
    out_data = x.data - lse
    if valid is not None:
        out_data = np.where(valid, out_data, 0.0)
    out_data = out_data.astype(x.data.dtype, copy=False)

    def _bwd(g: np.ndarray) -> None:
        gv = g if valid is None else np.where(valid, g, 0.0)
        probs = np.exp(logits - lse)
        if valid is not None:
            probs = np.where(valid, probs, 0.0)
        x._accumulate(gv - probs * gv.sum(axis=-1, keepdims=True))

    return Tensor._result(out_data, (x,), _bwd)


def masked_fill(x: Tensor, mask: np.ndarray, value: float) -> Tensor:
    """Replace entries where ``mask`` is True with ``value``."""
    fill = np.broadcast_to(np.asarray(mask, dtype=bool), x.shape)
    out_data = np.where(fill, np.asarray(value, dtype=x.data.dtype), x.data)

    def _bwd(g: np.ndarray) -> None:
        x._accumulate(np.where(fill, 0.0, g).astype(x.data.dtype, copy=False))

    return Tensor._result(out_data, (x,), _bwd)


def embedding_lookup(table: Tensor, indices: np.ndarray) -> Tensor:
    """Gather rows of a parameter table by integer index."""
    idx = np.asarray(indices)
    out_data = table.data[idx]

    def _bwd(g: np.ndarray) -> None:
        if table.grad is None:
            table.grad = np.zeros_like(table.data)
        np.add.at(table.grad, idx, g)

    return Tensor._result(out_data, (table,), _bwd)

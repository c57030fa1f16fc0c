"""Minimal reverse-mode differentiable arrays over numpy.

Covers exactly what the parsers, tagger, and feature extractors need:
matmul, broadcast add/mul, concat, reshape, row gather (embedding lookup),
relu/tanh, inverted dropout, softmax, cross-entropy, token-window
convolution, max-over-time, sum/mean. A graph instance is single-threaded
during forward/backward; distinct graphs over shared read-only parameters
may run concurrently.
"""

from __future__ import annotations

import numpy as np

from .. import kernels

DEFAULT_DTYPE = np.float32


class ShapeMismatch(ValueError):
    """Raised by a primitive whose operand shapes do not fit."""


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "op", "_parents", "_backward_fn")

    def __init__(self, data, requires_grad=False, op="leaf", parents=(), backward_fn=None):
        self.data = np.asarray(data)
        self.grad = None
        self.requires_grad = requires_grad
        self.op = op
        self._parents = parents
        self._backward_fn = backward_fn

    @property
    def shape(self):
        return self.data.shape

    @property
    def dtype(self):
        return self.data.dtype

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        return f"Tensor(op={self.op}, shape={self.data.shape}, requires_grad={self.requires_grad})"

    def _accumulate(self, g) -> None:
        if not self.requires_grad:
            return
        if self.grad is None:
            self.grad = np.array(g, dtype=self.data.dtype)
        else:
            self.grad += g

    def backward(self) -> None:
        """Reverse-mode accumulation from a scalar output."""
        if self.data.size != 1:
            raise ValueError(f"backward() needs a scalar, got shape {self.data.shape}")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward_fn is not None and node.grad is not None:
                node._backward_fn(node.grad)

    # Operator sugar; everything routes through the module-level primitives.
    def __add__(self, other):
        return add(self, as_tensor(other, self.dtype))

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, as_tensor(other, self.dtype))

    __rmul__ = __mul__

    def __neg__(self):
        return mul(self, as_tensor(-1.0, self.dtype))

    def __sub__(self, other):
        return add(self, -as_tensor(other, self.dtype))

    def __matmul__(self, other):
        return matmul(self, other)


def as_tensor(value, dtype=None) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=dtype if dtype is not None else DEFAULT_DTYPE))


def _node(data, parents, op, backward_fn) -> Tensor:
    if any(p.requires_grad for p in parents):
        return Tensor(data, requires_grad=True, op=op, parents=tuple(parents), backward_fn=backward_fn)
    return Tensor(data, op=op)


def _unbroadcast(g, shape):
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, s in enumerate(shape) if s == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ShapeMismatch(f"matmul: {a.data.shape} @ {b.data.shape}")
    out_data = a.data @ b.data

    def backward(g):
        a._accumulate(g @ b.data.T)
        b._accumulate(a.data.T @ g)

    return _node(out_data, (a, b), "matmul", backward)


def add(a: Tensor, b: Tensor) -> Tensor:
    try:
        out_data = a.data + b.data
    except ValueError as exc:
        raise ShapeMismatch(f"add: {a.data.shape} + {b.data.shape}") from exc

    def backward(g):
        a._accumulate(_unbroadcast(g, a.data.shape))
        b._accumulate(_unbroadcast(g, b.data.shape))

    return _node(out_data, (a, b), "add", backward)


def mul(a: Tensor, b: Tensor) -> Tensor:
    try:
        out_data = a.data * b.data
    except ValueError as exc:
        raise ShapeMismatch(f"mul: {a.data.shape} * {b.data.shape}") from exc

    def backward(g):
        a._accumulate(_unbroadcast(g * b.data, a.data.shape))
        b._accumulate(_unbroadcast(g * a.data, b.data.shape))

    return _node(out_data, (a, b), "mul", backward)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = list(tensors)
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            t._accumulate(np.take(g, range(lo, hi), axis=axis))

    return _node(out_data, tensors, "concat", backward)


def reshape(x: Tensor, shape) -> Tensor:
    out_data = x.data.reshape(shape)

    def backward(g):
        x._accumulate(g.reshape(x.data.shape))

    return _node(out_data, (x,), "reshape", backward)


def transpose(x: Tensor) -> Tensor:
    if x.data.ndim != 2:
        raise ShapeMismatch(f"transpose: need 2-D input, got {x.data.shape}")
    out_data = x.data.T

    def backward(g):
        x._accumulate(g.T)

    return _node(out_data, (x,), "transpose", backward)


def take_rows(x: Tensor, indices) -> Tensor:
    """Embedding lookup / row gather along axis 0; scatter-add on backward."""
    idx = np.asarray(indices, dtype=np.int64)
    out_data = x.data[idx]

    def backward(g):
        gx = np.zeros_like(x.data)
        np.add.at(gx, idx, g)
        x._accumulate(gx)

    return _node(out_data, (x,), "take_rows", backward)


def relu(x: Tensor) -> Tensor:
    out_data = np.maximum(x.data, 0)

    def backward(g):
        x._accumulate(g * (x.data > 0))

    return _node(out_data, (x,), "relu", backward)


def tanh(x: Tensor) -> Tensor:
    out_data = np.tanh(x.data)

    def backward(g):
        x._accumulate(g * (1.0 - out_data * out_data))

    return _node(out_data, (x,), "tanh", backward)


def dropout(x: Tensor, p: float, rng: np.random.Generator | None = None, train: bool = True) -> Tensor:
    """Inverted dropout: identity at eval time or p=0, scale 1/(1-p) at train."""
    if not train or p == 0.0:
        return x
    if rng is None:
        raise ValueError("train-mode dropout needs an explicit rng")
    mask = (rng.random(x.data.shape) >= p).astype(x.data.dtype) / (1.0 - p)
    out_data = x.data * mask

    def backward(g):
        x._accumulate(g * mask)

    return _node(out_data, (x,), "dropout", backward)


def softmax(x: Tensor, axis: int = -1) -> Tensor:
    shifted = x.data - np.max(x.data, axis=axis, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        dot = (g * out_data).sum(axis=axis, keepdims=True)
        x._accumulate((g - dot) * out_data)

    return _node(out_data, (x,), "softmax", backward)


def cross_entropy(logits: Tensor, targets) -> Tensor:
    """Mean negative log-likelihood of integer targets under row softmax.

    logits: (n, classes); -inf entries act as masked-out classes (their
    probability and gradient are exactly zero). Targets must index finite
    logits.
    """
    if logits.data.ndim != 2:
        raise ShapeMismatch(f"cross_entropy: logits must be 2-D, got {logits.data.shape}")
    idx = np.asarray(targets, dtype=np.int64)
    n = logits.data.shape[0]
    if idx.shape != (n,):
        raise ShapeMismatch(f"cross_entropy: {n} rows vs targets {idx.shape}")
    shifted = logits.data - np.max(logits.data, axis=1, keepdims=True)
    e = np.exp(shifted)
    probs = e / e.sum(axis=1, keepdims=True)
    picked = probs[np.arange(n), idx]
    if np.any(picked <= 0):
        raise ValueError("cross_entropy: a target class has zero probability (masked?)")
    out_data = np.asarray(-np.log(picked).mean(), dtype=logits.data.dtype)

    def backward(g):
        gl = probs.copy()
        gl[np.arange(n), idx] -= 1.0
        logits._accumulate(gl * (g / n))

    return _node(out_data, (logits,), "cross_entropy", backward)


def conv1d(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Windowed convolution over the token axis (see kernels.conv1d_forward)."""
    if x.data.ndim != 2 or w.data.ndim != 3 or w.data.shape[2] != x.data.shape[1]:
        raise ShapeMismatch(f"conv1d: x {x.data.shape}, w {w.data.shape}")
    if b.data.shape != (w.data.shape[0],):
        raise ShapeMismatch(f"conv1d: bias {b.data.shape} vs {w.data.shape[0]} channels")
    out_data = kernels.conv1d_forward(x.data, w.data, b.data)

    def backward(g):
        gx, gw, gb = kernels.conv1d_backward(x.data, w.data, g)
        x._accumulate(gx)
        w._accumulate(gw)
        b._accumulate(gb)

    return _node(out_data, (x, w, b), "conv1d", backward)


def max_over_time(x: Tensor) -> Tensor:
    """Max-pool over the token axis of an (n, d) matrix; ties go to the
    earliest row."""
    if x.data.ndim != 2:
        raise ShapeMismatch(f"max_over_time: need 2-D input, got {x.data.shape}")
    arg = np.argmax(x.data, axis=0)
    out_data = x.data[arg, np.arange(x.data.shape[1])]

    def backward(g):
        gx = np.zeros_like(x.data)
        gx[arg, np.arange(x.data.shape[1])] = g
        x._accumulate(gx)

    return _node(out_data, (x,), "max_over_time", backward)


def sum_(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    out_data = x.data.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        g = np.asarray(g)
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        x._accumulate(np.broadcast_to(g, x.data.shape).copy())

    return _node(out_data, (x,), "sum", backward)


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    count = x.data.size if axis is None else x.data.shape[axis]
    return mul(sum_(x, axis=axis, keepdims=keepdims), as_tensor(1.0 / count, x.dtype))


def graph_nodes(t: Tensor) -> list[Tensor]:
    """All tensors reachable backwards from t (for graph inspection)."""
    seen: set[int] = set()
    out: list[Tensor] = []
    stack = [t]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        out.append(node)
        stack.extend(node._parents)
    return out

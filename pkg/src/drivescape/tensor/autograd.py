"""Dense tensors with tape-based reverse-mode differentiation.

Tensors wrap numpy arrays. Every differentiable operation records its parents
and a vector-Jacobian closure on the output node; backward() walks the tape in
reverse topological order and accumulates gradients into leaf tensors that
have requires_grad set. Gradients of intermediate nodes are consumed on the
fly and never stored, so memory stays proportional to the forward graph.

Gradient recording is a thread-local switch: sampling threads can run under
no_grad() without touching each other or the training thread.
"""
from __future__ import annotations

import threading
from typing import Iterable, Sequence

import numpy as np

from ..errors import RankError, ShapeError

_EXP_CLAMP = 60.0

_tls = threading.local()


def grad_enabled() -> bool:
    return getattr(_tls, "grad_enabled", True)


class no_grad:
    """Context manager that disables tape recording on the current thread."""

    def __enter__(self):
        self._prev = grad_enabled()
        _tls.grad_enabled = False
        return self

    def __exit__(self, exc_type, exc, tb):
        _tls.grad_enabled = self._prev
        return False


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum grad down to `shape`, undoing numpy broadcasting."""
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def _as_array(value, ref_dtype=None) -> np.ndarray:
    if isinstance(value, np.ndarray):
        arr = value
    else:
        arr = np.asarray(value)
    if arr.dtype.kind in "iub":
        arr = arr.astype(np.float64)
    if ref_dtype is not None and arr.dtype != ref_dtype:
        arr = arr.astype(ref_dtype)
    return arr


class Tensor:
    """A numpy array plus optional gradient tape bookkeeping.

    .grad is populated only on leaf tensors (no recorded parents) that have
    requires_grad=True; it accumulates across backward() calls until
    zero_grad()/grad=None.
    """

    __slots__ = ("data", "grad", "requires_grad", "_vjps")

    def __init__(self, data, requires_grad: bool = False):
        self.data = _as_array(data)
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self._vjps: tuple = ()

    # ---------------------------------------------------------------- basics

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}, dtype={self.data.dtype}{flag})"

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def astype(self, dtype) -> "Tensor":
        out = _node(self.data.astype(dtype), (self,))
        if out._vjps:
            src_dtype = self.data.dtype
            out._vjps = ((self, lambda g: g.astype(src_dtype)),)
        return out

    # ------------------------------------------------------------ arithmetic

    def __add__(self, other):
        if isinstance(other, Tensor):
            out = _node(self.data + other.data, (self, other))
            if out._vjps:
                out._vjps = (
                    (self, lambda g: _unbroadcast(g, self.data.shape)),
                    (other, lambda g: _unbroadcast(g, other.data.shape)),
                )
            return out
        out = _node(self.data + other, (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: _unbroadcast(g, self.data.shape)),)
        return out

    __radd__ = __add__

    def __neg__(self):
        out = _node(-self.data, (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: -g),)
        return out

    def __sub__(self, other):
        if isinstance(other, Tensor):
            out = _node(self.data - other.data, (self, other))
            if out._vjps:
                out._vjps = (
                    (self, lambda g: _unbroadcast(g, self.data.shape)),
                    (other, lambda g: _unbroadcast(-g, other.data.shape)),
                )
            return out
        out = _node(self.data - other, (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: _unbroadcast(g, self.data.shape)),)
        return out

    def __rsub__(self, other):
        out = _node(other - self.data, (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: _unbroadcast(-g, self.data.shape)),)
        return out

    def __mul__(self, other):
        if isinstance(other, Tensor):
            a, b = self.data, other.data
            out = _node(a * b, (self, other))
            if out._vjps:
                out._vjps = (
                    (self, lambda g: _unbroadcast(g * b, a.shape)),
                    (other, lambda g: _unbroadcast(g * a, b.shape)),
                )
            return out
        a = self.data
        out = _node(a * other, (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: _unbroadcast(g * other, a.shape)),)
        return out

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            a, b = self.data, other.data
            out = _node(a / b, (self, other))
            if out._vjps:
                out._vjps = (
                    (self, lambda g: _unbroadcast(g / b, a.shape)),
                    (other, lambda g: _unbroadcast(-g * a / (b * b), b.shape)),
                )
            return out
        a = self.data
        out = _node(a / other, (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: _unbroadcast(g / other, a.shape)),)
        return out

    def __rtruediv__(self, other):
        a = self.data
        out = _node(other / a, (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: _unbroadcast(-g * other / (a * a), a.shape)),)
        return out

    def __pow__(self, p):
        if not isinstance(p, (int, float)):
            raise TypeError("only scalar exponents are supported")
        a = self.data
        out = _node(a**p, (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: g * p * a ** (p - 1)),)
        return out

    # ------------------------------------------------------------- reductions

    def sum(self, axis=None, keepdims: bool = False):
        a = self.data
        out = _node(a.sum(axis=axis, keepdims=keepdims), (self,))
        if out._vjps:

            def vjp(g):
                if axis is None:
                    return np.broadcast_to(g, a.shape).copy()
                if not keepdims:
                    g = np.expand_dims(g, axis)
                return np.broadcast_to(g, a.shape).copy()

            out._vjps = ((self, vjp),)
        return out

    def mean(self, axis=None, keepdims: bool = False):
        a = self.data
        count = a.size if axis is None else np.prod(
            [a.shape[i] for i in (axis if isinstance(axis, tuple) else (axis,))]
        )
        return self.sum(axis=axis, keepdims=keepdims) / float(count)

    # ------------------------------------------------------------ elementwise

    def exp(self):
        y = np.exp(np.clip(self.data, -_EXP_CLAMP, _EXP_CLAMP))
        inside = np.abs(self.data) < _EXP_CLAMP
        out = _node(y, (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: g * y * inside),)
        return out

    def log(self):
        a = self.data
        out = _node(np.log(a), (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: g / a),)
        return out

    def sqrt(self):
        y = np.sqrt(self.data)
        out = _node(y, (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: g * 0.5 / y),)
        return out

    def sigmoid(self):
        y = _sigmoid(self.data)
        out = _node(y, (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: g * y * (1.0 - y)),)
        return out

    def silu(self):
        s = _sigmoid(self.data)
        a = self.data
        out = _node(a * s, (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: g * s * (1.0 + a * (1.0 - s))),)
        return out

    def softmax(self, axis: int = -1):
        a = self.data
        shifted = a - a.max(axis=axis, keepdims=True)
        e = np.exp(shifted)
        y = e / e.sum(axis=axis, keepdims=True)
        out = _node(y, (self,))
        if out._vjps:

            def vjp(g):
                dot = (g * y).sum(axis=axis, keepdims=True)
                return y * (g - dot)

            out._vjps = ((self, vjp),)
        return out

    # ---------------------------------------------------------- shape juggling

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        a = self.data
        out = _node(a.reshape(shape), (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: g.reshape(a.shape)),)
        return out

    def transpose(self, axes: Sequence[int] | None = None):
        a = self.data
        if axes is None:
            axes = tuple(reversed(range(a.ndim)))
        axes = tuple(axes)
        inv = tuple(np.argsort(axes))
        out = _node(np.ascontiguousarray(a.transpose(axes)), (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: g.transpose(inv)),)
        return out

    def swapaxes(self, i: int, j: int):
        axes = list(range(self.data.ndim))
        axes[i], axes[j] = axes[j], axes[i]
        return self.transpose(axes)

    def __getitem__(self, idx):
        a = self.data
        out = _node(np.array(a[idx]), (self,))
        if out._vjps:

            def vjp(g):
                buf = np.zeros_like(a)
                np.add.at(buf, idx, g)
                return buf

            out._vjps = ((self, vjp),)
        return out

    def broadcast_to(self, shape):
        a = self.data
        out = _node(np.broadcast_to(a, shape).copy(), (self,))
        if out._vjps:
            out._vjps = ((self, lambda g: _unbroadcast(g, a.shape)),)
        return out

    # ---------------------------------------------------------------- matmul

    def matmul(self, other: "Tensor"):
        if not isinstance(other, Tensor):
            other = Tensor(other)
        a, b = self.data, other.data
        if a.ndim < 2 or b.ndim < 2:
            raise RankError(
                f"matmul requires operands with ndim >= 2, got {a.shape} @ {b.shape}"
            )
        if a.shape[-1] != b.shape[-2]:
            raise ShapeError(
                f"matmul inner dimensions do not match: {a.shape} @ {b.shape}"
            )
        out = _node(a @ b, (self, other))
        if out._vjps:

            def vjp_a(g):
                return _unbroadcast(g @ b.swapaxes(-1, -2), a.shape)

            def vjp_b(g):
                return _unbroadcast(a.swapaxes(-1, -2) @ g, b.shape)

            out._vjps = ((self, vjp_a), (other, vjp_b))
        return out

    def __matmul__(self, other):
        return self.matmul(other)

    # --------------------------------------------------------------- backward

    def zero_grad(self):
        self.grad = None

    def backward(self):
        if self.data.size != 1:
            raise RankError(
                f"backward() requires a scalar loss, got shape {self.data.shape}"
            )
        topo: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent, _ in node._vjps:
                if id(parent) not in visited and (parent.requires_grad or parent._vjps):
                    stack.append((parent, False))
        grads: dict[int, np.ndarray] = {id(self): np.ones_like(self.data)}
        for node in reversed(topo):
            g = grads.pop(id(node), None)
            if g is None:
                continue
            if not node._vjps:
                if node.requires_grad:
                    if node.grad is None:
                        node.grad = np.zeros_like(node.data)
                    node.grad += g
                continue
            for parent, vjp in node._vjps:
                if not (parent.requires_grad or parent._vjps):
                    continue
                contrib = vjp(g)
                key = id(parent)
                if key in grads:
                    grads[key] = grads[key] + contrib
                else:
                    grads[key] = contrib


def _sigmoid(a: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(a, -_EXP_CLAMP, _EXP_CLAMP)))


def _node(data: np.ndarray, parents: tuple[Tensor, ...]) -> Tensor:
    out = Tensor(data)
    if grad_enabled() and any(p.requires_grad or p._vjps for p in parents):
        out.requires_grad = True
        # Placeholder marks the node as recorded; callers overwrite with the
        # real vjp closures right after construction.
        out._vjps = ((parents[0], lambda g: g),)
    return out


def concat(tensors: Iterable[Tensor], axis: int = 0) -> Tensor:
    ts = list(tensors)
    if not ts:
        raise ShapeError("concat needs at least one tensor")
    arrays = [t.data for t in ts]
    out = _node(np.concatenate(arrays, axis=axis), tuple(ts))
    if out._vjps:
        sizes = [a.shape[axis] for a in arrays]
        offsets = np.cumsum([0] + sizes)

        def make_vjp(k):
            lo, hi = offsets[k], offsets[k + 1]

            def vjp(g):
                sl = [slice(None)] * g.ndim
                sl[axis] = slice(lo, hi)
                return g[tuple(sl)]

            return vjp

        out._vjps = tuple((ts[k], make_vjp(k)) for k in range(len(ts)))
    return out


def stack(tensors: Iterable[Tensor], axis: int = 0) -> Tensor:
    ts = [t.reshape(t.shape[:axis] + (1,) + t.shape[axis:]) for t in tensors]
    return concat(ts, axis=axis)


def unfold3x3(x: Tensor) -> Tensor:
    """Gather the 3x3 zero-padded neighborhood of every grid cell.

    x has shape (..., H, W, C); the result has shape (..., H, W, 9*C) with the
    neighborhood laid out row-major (dy then dx). The adjoint scatters each of
    the nine shifted slabs back, which keeps the backward pass fully
    vectorized.
    """
    a = x.data
    if a.ndim < 3:
        raise RankError(f"unfold3x3 requires ndim >= 3, got shape {a.shape}")
    lead = a.shape[:-3]
    h, w, c = a.shape[-3:]
    padded = np.zeros(lead + (h + 2, w + 2, c), dtype=a.dtype)
    padded[..., 1 : h + 1, 1 : w + 1, :] = a
    slabs = [
        padded[..., dy : dy + h, dx : dx + w, :]
        for dy in range(3)
        for dx in range(3)
    ]
    out = _node(np.concatenate(slabs, axis=-1), (x,))
    if out._vjps:

        def vjp(g):
            buf = np.zeros(lead + (h + 2, w + 2, c), dtype=g.dtype)
            for k in range(9):
                dy, dx = divmod(k, 3)
                buf[..., dy : dy + h, dx : dx + w, :] += g[
                    ..., k * c : (k + 1) * c
                ]
            return buf[..., 1 : h + 1, 1 : w + 1, :]

        out._vjps = ((x, vjp),)
    return out


def tensor(data, requires_grad: bool = False) -> Tensor:
    return Tensor(data, requires_grad=requires_grad)

"""Parameterized modules built on the autograd tensor.

Modules register child modules and parameters automatically through
__setattr__, and named_parameters() yields dotted paths ("block.0.q_proj.weight")
that double as checkpoint keys. Parameters carry a per-module learning-rate
multiplier so freshly attached condition pathways can train faster than the
backbone without a separate optimizer group.
"""
from __future__ import annotations

import math
from typing import Iterator

import numpy as np

from ..errors import DegenerateNormalizationError, ShapeError
from .autograd import Tensor


class Parameter(Tensor):
    __slots__ = ("name", "lr_multiplier")

    def __init__(self, data, name: str = "", lr_multiplier: float = 1.0):
        super().__init__(data, requires_grad=True)
        self.name = name
        self.lr_multiplier = float(lr_multiplier)


class Module:
    def __init__(self):
        object.__setattr__(self, "_params", {})
        object.__setattr__(self, "_modules", {})

    def __setattr__(self, name, value):
        if isinstance(value, Parameter):
            self._params[name] = value
        elif isinstance(value, Module):
            self._modules[name] = value
        object.__setattr__(self, name, value)

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Parameter]]:
        for name, p in self._params.items():
            yield (f"{prefix}{name}", p)
        for name, mod in self._modules.items():
            yield from mod.named_parameters(prefix=f"{prefix}{name}.")

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def parameters_dict(self) -> dict[str, Parameter]:
        """Map dotted names to parameters, stamping each parameter's name.

        Raises if the same Parameter object is reachable under two names;
        shared parameters would silently double-step in the optimizer.
        """
        out: dict[str, Parameter] = {}
        seen: dict[int, str] = {}
        for name, p in self.named_parameters():
            if id(p) in seen:
                raise ShapeError(
                    f"parameter aliased under two names: {seen[id(p)]!r} and {name!r}"
                )
            seen[id(p)] = name
            p.name = name
            out[name] = p
        return out

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data for name, p in self.parameters_dict().items()}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]):
        params = self.parameters_dict()
        missing = sorted(set(params) - set(arrays))
        if missing:
            raise ShapeError(f"missing parameters in state: {missing[:4]}")
        for name, p in params.items():
            arr = arrays[name]
            if tuple(arr.shape) != p.data.shape:
                raise ShapeError(
                    f"parameter {name!r} has shape {p.data.shape}, state has {arr.shape}"
                )
            p.data = arr.astype(p.data.dtype)


class ModuleList(Module):
    def __init__(self, mods=()):
        super().__init__()
        self._items: list[Module] = []
        for m in mods:
            self.append(m)

    def append(self, mod: Module):
        self._modules[str(len(self._items))] = mod
        self._items.append(mod)

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __getitem__(self, i) -> Module:
        return self._items[i]


class Linear(Module):
    def __init__(
        self,
        d_in: int,
        d_out: int,
        rng: np.random.Generator,
        zero_init: bool = False,
        lr_multiplier: float = 1.0,
        dtype=np.float64,
    ):
        super().__init__()
        if zero_init:
            w = np.zeros((d_in, d_out), dtype=dtype)
        else:
            bound = 1.0 / math.sqrt(d_in)
            w = rng.uniform(-bound, bound, size=(d_in, d_out)).astype(dtype)
        self.weight = Parameter(w, lr_multiplier=lr_multiplier)
        self.bias = Parameter(np.zeros(d_out, dtype=dtype), lr_multiplier=lr_multiplier)

    def __call__(self, x: Tensor) -> Tensor:
        return x.matmul(self.weight) + self.bias


class Mlp(Module):
    """Two-layer perceptron with SiLU in between."""

    def __init__(
        self,
        d_in: int,
        d_hidden: int,
        d_out: int,
        rng: np.random.Generator,
        zero_init_out: bool = False,
        lr_multiplier: float = 1.0,
        dtype=np.float64,
    ):
        super().__init__()
        self.fc1 = Linear(d_in, d_hidden, rng, lr_multiplier=lr_multiplier, dtype=dtype)
        self.fc2 = Linear(
            d_hidden, d_out, rng, zero_init=zero_init_out,
            lr_multiplier=lr_multiplier, dtype=dtype,
        )

    def __call__(self, x: Tensor) -> Tensor:
        return self.fc2(self.fc1(x).silu())


def feature_norm(
    x: Tensor,
    gamma: Tensor | None = None,
    beta: Tensor | None = None,
    stats_axes=(-2,),
    eps: float = 1e-5,
) -> Tensor:
    """Normalize x to zero mean and unit variance over stats_axes, then apply
    the affine pair if given. Population (biased) variance, like batch norm in
    inference-free form."""
    if isinstance(stats_axes, int):
        stats_axes = (stats_axes,)
    stats_axes = tuple(stats_axes)
    count = 1
    for ax in stats_axes:
        count *= x.shape[ax]
    if count < 2:
        raise DegenerateNormalizationError(
            f"normalization over axes {stats_axes} of shape {x.shape} "
            f"covers {count} element(s); need at least 2"
        )
    mean = x.mean(axis=stats_axes, keepdims=True)
    centered = x - mean
    var = (centered * centered).mean(axis=stats_axes, keepdims=True)
    normed = centered / (var + eps).sqrt()
    if gamma is not None:
        normed = normed * gamma
    if beta is not None:
        normed = normed + beta
    return normed


class FeatureNorm(Module):
    """feature_norm with learned per-channel scale and shift."""

    def __init__(self, dim: int, stats_axes=(-2,), lr_multiplier: float = 1.0,
                 dtype=np.float64):
        super().__init__()
        self.gamma = Parameter(np.ones(dim, dtype=dtype), lr_multiplier=lr_multiplier)
        self.beta = Parameter(np.zeros(dim, dtype=dtype), lr_multiplier=lr_multiplier)
        self.stats_axes = stats_axes

    def __call__(self, x: Tensor) -> Tensor:
        return feature_norm(x, self.gamma, self.beta, stats_axes=self.stats_axes)


def split_heads(x: Tensor, heads: int) -> Tensor:
    """(..., N, d) -> (..., heads, N, d//heads)"""
    *lead, n, d = x.shape
    if d % heads != 0:
        raise ShapeError(f"feature dim {d} not divisible by {heads} heads")
    x = x.reshape(tuple(lead) + (n, heads, d // heads))
    return x.swapaxes(-3, -2)


def merge_heads(x: Tensor) -> Tensor:
    """(..., heads, N, dh) -> (..., N, heads*dh)"""
    *lead, h, n, dh = x.shape
    x = x.swapaxes(-3, -2)
    return x.reshape(tuple(lead) + (n, h * dh))


def scaled_attention(q: Tensor, k: Tensor, v: Tensor, heads: int = 1) -> Tensor:
    """Softmax attention over the second-to-last axis.

    q: (..., Nq, d), k/v: (..., Nk, d). Leading batch axes broadcast. The
    scale is 1/sqrt(d/heads), the per-head value width.
    """
    if q.shape[-1] != k.shape[-1]:
        raise ShapeError(
            f"query/key dims differ: {q.shape} vs {k.shape}"
        )
    if k.shape[-2] != v.shape[-2]:
        raise ShapeError(
            f"key/value token counts differ: {k.shape} vs {v.shape}"
        )
    qh = split_heads(q, heads)
    kh = split_heads(k, heads)
    vh = split_heads(v, heads)
    scale = 1.0 / math.sqrt(q.shape[-1] // heads)
    scores = qh.matmul(kh.swapaxes(-1, -2)) * scale
    weights = scores.softmax(axis=-1)
    return merge_heads(weights.matmul(vh))

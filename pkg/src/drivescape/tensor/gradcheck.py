"""Finite-difference verification of recorded gradients.

check_gradients builds the loss once through the tape, then perturbs every
input entry by +-h and compares the central difference against the recorded
gradient. Inputs should be float64; h defaults to 1e-5.
"""
from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .autograd import Tensor, no_grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray, floor: float = 1e-6) -> float:
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), floor)
    return float(np.max(np.abs(analytic - numeric) / denom))


def check_gradients(
    fn: Callable[[Sequence[Tensor]], Tensor],
    tensors: Sequence[Tensor],
    h: float = 1e-5,
    floor: float = 1e-6,
) -> float:
    """Return the worst relative error between tape and central differences.

    fn maps the given tensors to a scalar Tensor. Every tensor in `tensors`
    must be a float64 leaf with requires_grad=True.
    """
    for t in tensors:
        t.grad = None
    loss = fn(tensors)
    loss.backward()
    worst = 0.0
    with no_grad():
        for t in tensors:
            grad = t.grad if t.grad is not None else np.zeros_like(t.data)
            flat = t.data.reshape(-1)
            num = np.zeros_like(flat)
            for i in range(flat.size):
                orig = flat[i]
                flat[i] = orig + h
                hi = float(fn(tensors).data)
                flat[i] = orig - h
                lo = float(fn(tensors).data)
                flat[i] = orig
                num[i] = (hi - lo) / (2.0 * h)
            worst = max(
                worst,
                relative_error(grad.reshape(-1), num, floor=floor),
            )
    return worst

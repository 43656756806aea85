"""AdamW with decoupled weight decay and per-parameter rate multipliers."""
from __future__ import annotations

import numpy as np

from ..errors import CheckpointError
from .nn import Parameter


class AdamW:
    """Standard AdamW.

    update: m = b1*m + (1-b1)*g ; v = b2*v + (1-b2)*g^2
            mhat = m/(1-b1^t) ; vhat = v/(1-b2^t)
            p -= lr_p * (mhat/(sqrt(vhat)+eps) + wd*p)
    where lr_p = lr * p.lr_multiplier. The decay term uses the parameter value
    before the Adam step, decoupled from the gradient moments.
    """

    def __init__(
        self,
        params: dict[str, Parameter],
        lr: float = 1e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.01,
    ):
        self.params = dict(params)
        self.lr = float(lr)
        self.beta1, self.beta2 = betas
        self.eps = float(eps)
        self.weight_decay = float(weight_decay)
        self.step_count = 0
        self.m = {k: np.zeros_like(p.data) for k, p in self.params.items()}
        self.v = {k: np.zeros_like(p.data) for k, p in self.params.items()}

    def zero_grad(self):
        for p in self.params.values():
            p.grad = None

    def step(self):
        self.step_count += 1
        t = self.step_count
        bc1 = 1.0 - self.beta1**t
        bc2 = 1.0 - self.beta2**t
        for key, p in self.params.items():
            if p.grad is None:
                continue
            g = p.grad
            m = self.m[key]
            v = self.v[key]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            lr_p = self.lr * p.lr_multiplier
            mhat = m / bc1
            vhat = v / bc2
            p.data = p.data - lr_p * (
                mhat / (np.sqrt(vhat) + self.eps) + self.weight_decay * p.data
            )

    def state_arrays(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for key in self.params:
            out[f"opt.m.{key}"] = self.m[key]
            out[f"opt.v.{key}"] = self.v[key]
        out["opt.step"] = np.array([float(self.step_count)])
        return out

    def load_state_arrays(self, arrays: dict[str, np.ndarray]):
        if "opt.step" not in arrays:
            raise CheckpointError("optimizer state is missing 'opt.step'")
        for key, p in self.params.items():
            mk, vk = f"opt.m.{key}", f"opt.v.{key}"
            if mk not in arrays or vk not in arrays:
                raise CheckpointError(f"optimizer state is missing moments for {key!r}")
            if arrays[mk].shape != p.data.shape:
                raise CheckpointError(
                    f"optimizer moment {key!r} has shape {arrays[mk].shape}, "
                    f"parameter has {p.data.shape}"
                )
            self.m[key] = arrays[mk].astype(p.data.dtype)
            self.v[key] = arrays[vk].astype(p.data.dtype)
        self.step_count = int(round(float(arrays["opt.step"][0])))

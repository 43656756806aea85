from .autograd import Tensor, concat, grad_enabled, no_grad, stack, tensor, unfold3x3
from .checkpoint import FORMAT_VERSION, load_checkpoint, save_checkpoint
from .gradcheck import check_gradients, relative_error
from .nn import (
    FeatureNorm,
    Linear,
    Mlp,
    Module,
    ModuleList,
    Parameter,
    feature_norm,
    merge_heads,
    scaled_attention,
    split_heads,
)
from .optim import AdamW

__all__ = [
    "AdamW",
    "FORMAT_VERSION",
    "FeatureNorm",
    "Linear",
    "Mlp",
    "Module",
    "ModuleList",
    "Parameter",
    "Tensor",
    "check_gradients",
    "concat",
    "feature_norm",
    "grad_enabled",
    "load_checkpoint",
    "merge_heads",
    "no_grad",
    "relative_error",
    "save_checkpoint",
    "scaled_attention",
    "split_heads",
    "stack",
    "tensor",
    "unfold3x3",
]

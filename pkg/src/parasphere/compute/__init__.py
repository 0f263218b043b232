"""Differentiable-computation substrate: tape autodiff, Adam, checkpoints."""

from .adam import AdamState, adam_init, adam_step, warmup_inverse_sqrt
from .checkpoint import load_checkpoint, save_checkpoint
from .gradcheck import GradCheckReport, gradient_check, relative_error
from .params import ParameterStore, derive_rng, forward_backward
from .tensor import (
    ComputeError,
    Tensor,
    add,
    cross_entropy,
    dropout,
    embedding,
    first_non_finite,
    layer_norm,
    matmul,
    mean_all,
    mul,
    relu,
    reshape,
    softmax,
    sub,
    sum_all,
    transpose,
    vmf_loss,
)

__all__ = [
    "AdamState",
    "ComputeError",
    "GradCheckReport",
    "ParameterStore",
    "Tensor",
    "adam_init",
    "adam_step",
    "add",
    "cross_entropy",
    "derive_rng",
    "dropout",
    "embedding",
    "first_non_finite",
    "forward_backward",
    "gradient_check",
    "layer_norm",
    "load_checkpoint",
    "matmul",
    "mean_all",
    "mul",
    "relative_error",
    "relu",
    "reshape",
    "save_checkpoint",
    "softmax",
    "sub",
    "sum_all",
    "transpose",
    "vmf_loss",
    "warmup_inverse_sqrt",
]

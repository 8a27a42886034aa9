"""Minimal dense-tensor engine: reverse-mode gradients, layers, Adam."""
from .adam import adam_step, zero_grads
from .checkpoint import CheckpointError, load_checkpoint, save_checkpoint
from .gradcheck import grad_check
from .ops import (
    avg_pool2d,
    concat_channels,
    conv1d,
    conv2d,
    dropout,
    elementwise_scale,
    embedding,
    flatten,
    global_max_pool1d,
    linear,
    max_pool1d,
    pad2d,
    relu,
    softmax_xent,
)
from .tensor import Parameter, ShapeError, Tape, Tensor, backward

__all__ = [
    "CheckpointError",
    "Parameter",
    "ShapeError",
    "Tape",
    "Tensor",
    "adam_step",
    "avg_pool2d",
    "backward",
    "concat_channels",
    "conv1d",
    "conv2d",
    "dropout",
    "elementwise_scale",
    "embedding",
    "flatten",
    "global_max_pool1d",
    "grad_check",
    "linear",
    "load_checkpoint",
    "max_pool1d",
    "pad2d",
    "relu",
    "save_checkpoint",
    "softmax_xent",
    "zero_grads",
]

"""Finite-difference checks for every differentiable layer family.

Each fragment wires a small randomly-initialized instance of one layer
family into a scalar cross-entropy loss (inputs are Parameters too, so
input gradients are probed alongside weights). `run_all` returns the max
relative error per family; everything is seeded and CPU-cheap.
"""
from __future__ import annotations

import numpy as np

from . import nn
from .models import ModelConfig, Sent2MatrixDense
from .nn import Parameter, Tensor, grad_check

GRAD_TOLERANCE = 1e-4


def _p(rng: np.random.Generator, *shape: int) -> Parameter:
    return Parameter(rng.standard_normal(shape) * 0.5)


def _head(tape, t: Tensor, w: Parameter, b: Parameter, labels: np.ndarray) -> Tensor:
    flat = nn.flatten(tape, t)
    logits = nn.linear(tape, flat, w, b)
    return nn.softmax_xent(tape, logits, labels)


def check_linear(seed: int) -> float:
    rng = np.random.default_rng(seed)
    x, w, b = _p(rng, 3, 5), _p(rng, 4, 5), _p(rng, 4)
    y = np.array([0, 2, 3])

    def loss_fn(tape):
        return nn.softmax_xent(tape, nn.linear(tape, x, w, b), y)

    return grad_check(loss_fn, [x, w, b])


def check_conv1d(seed: int, stride: int = 1) -> float:
    rng = np.random.default_rng(seed)
    x, w, b = _p(rng, 2, 3, 9), _p(rng, 4, 3, 3), _p(rng, 4)
    hw, hb = _p(rng, 2, 4 * ((9 - 3) // stride + 1)), _p(rng, 2)
    y = np.array([1, 0])

    def loss_fn(tape):
        t = nn.relu(tape, nn.conv1d(tape, x, w, b, stride=stride))
        return _head(tape, t, hw, hb, y)

    return grad_check(loss_fn, [x, w, b, hw, hb])


def check_conv2d(seed: int, stride_h: int = 1, stride_w: int = 1) -> float:
    rng = np.random.default_rng(seed)
    x, w, b = _p(rng, 2, 3, 6, 7), _p(rng, 4, 3, 3, 2), _p(rng, 4)
    h2 = (6 - 3) // stride_h + 1
    w2 = (7 - 2) // stride_w + 1
    hw, hb = _p(rng, 2, 4 * h2 * w2), _p(rng, 2)
    y = np.array([1, 0])

    def loss_fn(tape):
        t = nn.relu(tape, nn.conv2d(tape, x, w, b, stride_h, stride_w))
        return _head(tape, t, hw, hb, y)

    return grad_check(loss_fn, [x, w, b, hw, hb])


def check_avg_pool2d(seed: int) -> float:
    rng = np.random.default_rng(seed)
    x = _p(rng, 2, 3, 4, 6)
    hw, hb = _p(rng, 3, 3 * 2 * 3), _p(rng, 3)
    y = np.array([2, 0])

    def loss_fn(tape):
        return _head(tape, nn.avg_pool2d(tape, x, 2, 2), hw, hb, y)

    return grad_check(loss_fn, [x, hw, hb])


def check_max_pool1d(seed: int) -> float:
    rng = np.random.default_rng(seed)
    x = _p(rng, 2, 3, 10)
    hw, hb = _p(rng, 2, 3 * 3), _p(rng, 2)
    y = np.array([0, 1])

    def loss_fn(tape):
        return _head(tape, nn.max_pool1d(tape, x, 3), hw, hb, y)

    return grad_check(loss_fn, [x, hw, hb])


def check_global_max_pool1d(seed: int) -> float:
    rng = np.random.default_rng(seed)
    x = _p(rng, 3, 4, 7)
    hw, hb = _p(rng, 2, 4), _p(rng, 2)
    y = np.array([0, 1, 1])

    def loss_fn(tape):
        return _head(tape, nn.global_max_pool1d(tape, x), hw, hb, y)

    return grad_check(loss_fn, [x, hw, hb])


def check_concat_pad(seed: int) -> float:
    rng = np.random.default_rng(seed)
    x, w, b = _p(rng, 2, 2, 4, 5), _p(rng, 3, 2, 3, 2), _p(rng, 3)
    hw, hb = _p(rng, 2, (2 + 3) * 4 * 5), _p(rng, 2)
    y = np.array([1, 1])

    def loss_fn(tape):
        branch = nn.pad2d(tape, x, (1, 1), (0, 1))
        branch = nn.relu(tape, nn.conv2d(tape, branch, w, b))
        t = nn.concat_channels(tape, x, branch)
        return _head(tape, t, hw, hb, y)

    return grad_check(loss_fn, [x, w, b, hw, hb])


def check_dropout(seed: int) -> float:
    rng = np.random.default_rng(seed)
    x = _p(rng, 3, 8)
    hw, hb = _p(rng, 2, 8), _p(rng, 2)
    y = np.array([0, 1, 0])

    # the mask must be identical on every re-evaluation, so the RNG is
    # reconstructed from a fixed seed inside the closure
    def loss_fn(tape):
        mask_rng = np.random.default_rng(99)
        t = nn.dropout(tape, x, 0.5, rng=mask_rng, training=True)
        return nn.softmax_xent(tape, nn.linear(tape, t, hw, hb), y)

    return grad_check(loss_fn, [x, hw, hb])


def check_embedding(seed: int) -> float:
    rng = np.random.default_rng(seed)
    table = _p(rng, 4, 7)
    idx = rng.integers(0, 7, size=(2, 5))
    mask = (rng.random((2, 1, 5)) < 0.8).astype(np.float64)
    hw, hb = _p(rng, 2, 4 * 5), _p(rng, 2)
    y = np.array([1, 0])

    def loss_fn(tape):
        e = nn.embedding(tape, table, idx)
        e = nn.elementwise_scale(tape, e, mask)
        return _head(tape, e, hw, hb, y)

    return grad_check(loss_fn, [table, hw, hb])


def check_softmax_xent(seed: int) -> float:
    rng = np.random.default_rng(seed)
    logits = _p(rng, 3, 4)
    y = np.array([0, 3, 1])

    def loss_fn(tape):
        return nn.softmax_xent(tape, logits, y)

    return grad_check(loss_fn, [logits])


def check_dense_block(seed: int) -> float:
    """One full mini dense-block model, input gradients included."""
    rng = np.random.default_rng(seed)
    config = ModelConfig(
        arch="sent2matrix_dense",
        n=5,
        m=6,
        padding="serpentine",
        initial_filters=4,
        blocks=2,
        layers_per_block=2,
        growth=3,
        kernel=(3, 2),
        fc_hidden=8,
        classes=3,
        dropout_keep=1.0,
        seed=seed,
    )
    model = Sent2MatrixDense(config)
    x = Parameter(rng.standard_normal((2, model.in_channels, model.in_h, model.in_w)) * 0.5)
    y = np.array([0, 2])

    def loss_fn(tape):
        logits = model.forward(x, tape=tape, training=False)
        return nn.softmax_xent(tape, logits, y)

    return grad_check(loss_fn, [x] + model.parameters(), max_per_param=6)


def run_all(seed: int = 7) -> dict[str, float]:
    """Max relative finite-difference error per layer family."""
    return {
        "linear": check_linear(seed),
        "conv1d": check_conv1d(seed),
        "conv1d_stride2": check_conv1d(seed, stride=2),
        "conv2d": check_conv2d(seed),
        "conv2d_stride2": check_conv2d(seed, stride_h=1, stride_w=2),
        "avg_pool2d": check_avg_pool2d(seed),
        "max_pool1d": check_max_pool1d(seed),
        "global_max_pool1d": check_global_max_pool1d(seed),
        "concat_pad": check_concat_pad(seed),
        "dropout": check_dropout(seed),
        "embedding": check_embedding(seed),
        "softmax_xent": check_softmax_xent(seed),
        "dense_block": check_dense_block(seed),
    }

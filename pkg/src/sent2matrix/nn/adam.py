"""Adam updates over Parameter objects."""
from __future__ import annotations

from typing import Iterable

import numpy as np

from .tensor import Parameter


def adam_step(
    params: Iterable[Parameter],
    lr: float = 0.001,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """One bias-corrected Adam update per parameter; increments step counts.

    theta -= lr * m_hat / (sqrt(v_hat) + eps), with the moment buffers held
    on each Parameter and updated in place.
    """
    for p in params:
        p.step_count += 1
        t = p.step_count
        g = p.grad
        p.m1 *= beta1
        p.m1 += (1.0 - beta1) * g
        p.m2 *= beta2
        p.m2 += (1.0 - beta2) * (g * g)
        m_hat = p.m1 / (1.0 - beta1**t)
        v_hat = p.m2 / (1.0 - beta2**t)
        p.data -= lr * m_hat / (np.sqrt(v_hat) + eps)


def zero_grads(params: Iterable[Parameter]) -> None:
    for p in params:
        p.zero_grad()

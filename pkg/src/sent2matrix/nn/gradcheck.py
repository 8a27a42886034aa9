"""Finite-difference verification of reverse-mode gradients."""
from __future__ import annotations

from typing import Callable, Iterable, Mapping

import numpy as np

from .adam import zero_grads
from .tensor import Parameter, Tape, backward


def grad_check(
    loss_fn: Callable[[Tape | None], "object"],
    params: Iterable[Parameter] | Mapping[str, Parameter],
    h: float = 1e-6,
    max_per_param: int = 16,
    rng: np.random.Generator | None = None,
) -> float:
    """Max relative error between tape gradients and central differences.

    loss_fn(tape) must rebuild the forward pass and return the scalar loss
    Tensor; it is called once with a tape for the analytic gradients and
    twice per probed element for the +-h evaluations. Up to max_per_param
    elements are sampled per parameter. The relative error of a pair (a, n)
    is |a - n| / max(1e-8, |a| + |n|).
    """
    if isinstance(params, Mapping):
        params = list(params.values())
    else:
        params = list(params)
    if rng is None:
        rng = np.random.default_rng(0)

    zero_grads(params)
    tape = Tape()
    loss = loss_fn(tape)
    backward(tape, loss)
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, a in zip(params, analytic):
        flat = p.data.reshape(-1)
        count = min(max_per_param, flat.size)
        if count == flat.size:
            picks = np.arange(flat.size)
        else:
            picks = rng.choice(flat.size, size=count, replace=False)
        for i in picks:
            orig = flat[i]
            flat[i] = orig + h
            up = float(loss_fn(None).data)
            flat[i] = orig - h
            down = float(loss_fn(None).data)
            flat[i] = orig
            numeric = (up - down) / (2.0 * h)
            ref = a.reshape(-1)[i]
            err = abs(ref - numeric) / max(1e-8, abs(ref) + abs(numeric))
            worst = max(worst, err)
    return worst

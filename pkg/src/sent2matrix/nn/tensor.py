"""Dense float64 tensors, learnable parameters, and the reverse-mode tape.

Everything is 64-bit. Ops execute eagerly on numpy arrays and, when handed
a Tape, push one backward closure per op; `backward` replays them in
reverse, accumulating adjoints into `.grad` buffers. Gradients flow into
Parameters and into intermediates produced on the tape; plain input leaves
are left untouched (their adjoints are never materialized).
"""
from __future__ import annotations

import numpy as np


class ShapeError(ValueError):
    """Raised when operand shapes do not line up."""


class Tensor:
    """A dense n-dimensional float64 array with an optional gradient buffer."""

    __slots__ = ("data", "grad", "_on_tape")

    def __init__(self, data) -> None:
        arr = np.asarray(data, dtype=np.float64)
        # note: ascontiguousarray would promote 0-d scalars to 1-d
        self.data = arr if arr.flags.c_contiguous else np.ascontiguousarray(arr)
        if 0 in self.data.shape:
            raise ShapeError(f"tensor dimensions must be >= 1, got shape {self.data.shape}")
        self.grad: np.ndarray | None = None
        self._on_tape = False

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def needs_grad(self) -> bool:
        """True when backward should accumulate an adjoint for this tensor."""
        return self._on_tape or isinstance(self, Parameter)

    def accumulate_grad(self, g: np.ndarray, own: bool = False) -> None:
        """Add an adjoint contribution.

        own=True promises g is a freshly allocated array the caller will not
        touch again, letting the first contribution be adopted without a
        defensive copy (g may otherwise be a view into another adjoint).
        """
        if self.grad is None:
            self.grad = g if own else np.array(g)
        else:
            self.grad += g

    def __repr__(self) -> str:
        return f"{type(self).__name__}(shape={self.data.shape})"


class Parameter(Tensor):
    """Learnable tensor: value plus gradient and Adam moment buffers.

    All four arrays share one shape; step_count tracks how many optimizer
    updates this parameter has received (used for bias correction).
    """

    __slots__ = ("m1", "m2", "step_count")

    def __init__(self, data) -> None:
        super().__init__(data)
        self.grad = np.zeros_like(self.data)
        self.m1 = np.zeros_like(self.data)
        self.m2 = np.zeros_like(self.data)
        self.step_count = 0

    def zero_grad(self) -> None:
        self.grad[...] = 0.0


class Tape:
    """Ordered record of executed ops; reverse replay yields all adjoints."""

    def __init__(self) -> None:
        self._records: list[tuple[Tensor, object]] = []

    def record(self, out: Tensor, backward_fn) -> None:
        out._on_tape = True
        self._records.append((out, backward_fn))

    def __len__(self) -> int:
        return len(self._records)


def backward(tape: Tape, loss: Tensor) -> None:
    """Run reverse-mode accumulation from a scalar loss over the tape.

    Visits every recorded op exactly once, after all of its consumers; ops
    whose outputs never influenced the loss are skipped (their adjoint is
    zero and was never allocated).
    """
    if loss.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    loss.grad = np.ones_like(loss.data)
    for out, fn in reversed(tape._records):
        if out.grad is None:
            continue
        fn(out.grad)

"""Differentiable layer operations.

Every op takes the tape as its first argument (pass None to run without
recording), computes eagerly, and pushes one backward closure. Convolutions
are valid-only (no implicit spatial padding; use pad2d for explicit data
padding) and are evaluated as direct convolutions via an im2col matmul,
chunked over the batch to bound the buffer size.

Single-sample inputs are accepted where the batch axis is unambiguous:
conv2d/avg_pool2d/pad2d take (C, H, W) or (B, C, H, W), conv1d takes
(C, L) or (B, C, L), linear takes (F,) or (B, F). The remaining ops expect
batched arrays with channels on axis 1.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .tensor import Parameter, ShapeError, Tape, Tensor

# Cap on the per-chunk im2col buffer; keeps peak memory flat for big batches.
_CHUNK_BYTES = 64 << 20
# Patch matrices at most this large are kept from forward to backward, saving
# the re-gather when computing weight gradients.
_CACHE_BYTES = 192 << 20


def _im2col(x: np.ndarray, k1: int, k2: int, sh: int, sw: int) -> np.ndarray:
    """Patch matrix of shape (B*H2*W2, C*k1*k2); rows ordered batch-major."""
    B, C, H, W = x.shape
    H2 = (H - k1) // sh + 1
    W2 = (W - k2) // sw + 1
    s0, s1, s2, s3 = x.strides
    win = as_strided(
        x,
        (B, H2, W2, C, k1, k2),
        (s0, s2 * sh, s3 * sw, s1, s2, s3),
        writeable=False,
    )
    return win.reshape(B * H2 * W2, C * k1 * k2)


def _conv_chunk(B: int, patch_elems: int) -> int:
    step = _CHUNK_BYTES // max(1, patch_elems * 8)
    return max(1, min(B, step))


def _conv2d_forward(x, w, sh, sw, keep_cols=False):
    """Forward conv; optionally returns the patch matrix for backward reuse."""
    B, C, H, W = x.shape
    O, _, k1, k2 = w.shape
    H2 = (H - k1) // sh + 1
    W2 = (W - k2) // sw + 1
    wmat = w.reshape(O, -1)
    if keep_cols and B * H2 * W2 * C * k1 * k2 * 8 <= _CACHE_BYTES:
        cols = _im2col(x, k1, k2, sh, sw)
        out = (cols @ wmat.T).reshape(B, H2, W2, O).transpose(0, 3, 1, 2)
        return np.ascontiguousarray(out), cols
    out = np.empty((B, O, H2, W2))
    step = _conv_chunk(B, H2 * W2 * C * k1 * k2)
    for lo in range(0, B, step):
        cols = _im2col(x[lo : lo + step], k1, k2, sh, sw)
        prod = cols @ wmat.T
        out[lo : lo + step] = prod.reshape(-1, H2, W2, O).transpose(0, 3, 1, 2)
    return out, None


def _conv2d_backward(x, w, g, sh, sw, need_dx, cols=None):
    B, C, H, W = x.shape
    O, _, k1, k2 = w.shape
    _, _, H2, W2 = g.shape
    wmat = w.reshape(O, -1)
    dw = np.zeros((O, C * k1 * k2))
    dx = np.zeros_like(x) if need_dx else None

    def accumulate(lo, hi, chunk_cols):
        gmat = g[lo:hi].transpose(0, 2, 3, 1).reshape(-1, O)
        dw_part = gmat.T @ chunk_cols
        if need_dx:
            dcols = (gmat @ wmat).reshape(-1, H2, W2, C, k1, k2)
            dxc = dx[lo:hi]
            for di in range(k1):
                for dj in range(k2):
                    dxc[:, :, di : di + sh * H2 : sh, dj : dj + sw * W2 : sw] += dcols[
                        :, :, :, :, di, dj
                    ].transpose(0, 3, 1, 2)
        return dw_part

    if cols is not None:
        dw += accumulate(0, B, cols)
    else:
        step = _conv_chunk(B, H2 * W2 * C * k1 * k2)
        for lo in range(0, B, step):
            dw += accumulate(lo, lo + step, _im2col(x[lo : lo + step], k1, k2, sh, sw))
    db = g.sum(axis=(0, 2, 3))
    return dx, dw.reshape(w.shape), db


def _as_batched(data: np.ndarray, ndim: int) -> tuple[np.ndarray, bool]:
    if data.ndim == ndim:
        return data, True
    if data.ndim == ndim - 1:
        return data[None], False
    raise ShapeError(f"expected a {ndim - 1}-d or {ndim}-d array, got shape {data.shape}")


def conv2d(
    tape: Tape | None,
    x: Tensor,
    w: Tensor,
    b: Tensor,
    stride_h: int = 1,
    stride_w: int = 1,
) -> Tensor:
    """Valid 2-D convolution plus bias: filters (out_ch, in_ch, k1, k2)."""
    x4, batched = _as_batched(x.data, 4)
    if w.data.ndim != 4:
        raise ShapeError(f"filters must be 4-d (out,in,k1,k2), got {w.shape}")
    O, C, k1, k2 = w.data.shape
    if C != x4.shape[1]:
        raise ShapeError(f"input has {x4.shape[1]} channels, filters expect {C}")
    if k1 > x4.shape[2] or k2 > x4.shape[3]:
        raise ShapeError(f"kernel {k1}x{k2} exceeds input {x4.shape[2]}x{x4.shape[3]}")
    if stride_h < 1 or stride_w < 1:
        raise ShapeError("strides must be >= 1")
    if b.data.shape != (O,):
        raise ShapeError(f"bias must have shape ({O},), got {b.shape}")
    out_data, cols = _conv2d_forward(x4, w.data, stride_h, stride_w, keep_cols=tape is not None)
    out_data += b.data[None, :, None, None]
    out = Tensor(out_data if batched else out_data[0])
    if tape is not None:

        def bwd(g: np.ndarray) -> None:
            g4 = g if batched else g[None]
            dx, dw, db = _conv2d_backward(
                x4, w.data, g4, stride_h, stride_w, x.needs_grad(), cols
            )
            if w.needs_grad():
                w.accumulate_grad(dw, own=True)
            if b.needs_grad():
                b.accumulate_grad(db, own=True)
            if x.needs_grad():
                x.accumulate_grad(dx if batched else dx[0], own=True)

        tape.record(out, bwd)
    return out


def conv1d(tape: Tape | None, x: Tensor, w: Tensor, b: Tensor, stride: int = 1) -> Tensor:
    """Valid 1-D convolution plus bias: filters (out_ch, in_ch, kernel).

    Evaluated through the 2-D kernels with a singleton row axis, so it is
    bit-identical to conv2d on a (C, 1, L) input with k1 = 1.
    """
    x3, batched = _as_batched(x.data, 3)
    if w.data.ndim != 3:
        raise ShapeError(f"filters must be 3-d (out,in,k), got {w.shape}")
    O, C, k = w.data.shape
    if C != x3.shape[1]:
        raise ShapeError(f"input has {x3.shape[1]} channels, filters expect {C}")
    if k > x3.shape[2]:
        raise ShapeError(f"kernel {k} exceeds input length {x3.shape[2]}")
    if stride < 1:
        raise ShapeError("stride must be >= 1")
    if b.data.shape != (O,):
        raise ShapeError(f"bias must have shape ({O},), got {b.shape}")
    x4 = x3[:, :, None, :]
    w4 = w.data[:, :, None, :]
    out_data, cols = _conv2d_forward(x4, w4, 1, stride, keep_cols=tape is not None)
    out_data += b.data[None, :, None, None]
    out_data = out_data[:, :, 0, :]
    out = Tensor(out_data if batched else out_data[0])
    if tape is not None:

        def bwd(g: np.ndarray) -> None:
            g4 = (g if batched else g[None])[:, :, None, :]
            dx, dw, db = _conv2d_backward(x4, w4, g4, 1, stride, x.needs_grad(), cols)
            if w.needs_grad():
                w.accumulate_grad(dw[:, :, 0, :], own=True)
            if b.needs_grad():
                b.accumulate_grad(db, own=True)
            if x.needs_grad():
                dx3 = dx[:, :, 0, :]
                x.accumulate_grad(dx3 if batched else dx3[0], own=True)

        tape.record(out, bwd)
    return out


def relu(tape: Tape | None, x: Tensor) -> Tensor:
    out = Tensor(np.maximum(x.data, 0.0))
    if tape is not None and x.needs_grad():
        mask = x.data > 0.0

        def bwd(g: np.ndarray) -> None:
            x.accumulate_grad(g * mask, own=True)

        tape.record(out, bwd)
    return out


def avg_pool2d(tape: Tape | None, x: Tensor, pool_h: int, pool_w: int) -> Tensor:
    """Non-overlapping average pooling; spatial dims must divide exactly."""
    x4, batched = _as_batched(x.data, 4)
    B, C, H, W = x4.shape
    if pool_h < 1 or pool_w < 1 or H % pool_h or W % pool_w:
        raise ShapeError(f"pool {pool_h}x{pool_w} does not divide input {H}x{W}")
    H2, W2 = H // pool_h, W // pool_w
    r = x4.reshape(B, C, H2, pool_h, W2, pool_w)
    out_data = r.mean(axis=(3, 5))
    out = Tensor(out_data if batched else out_data[0])
    if tape is not None and x.needs_grad():

        def bwd(g: np.ndarray) -> None:
            g4 = g if batched else g[None]
            spread = np.broadcast_to(
                g4[:, :, :, None, :, None] / (pool_h * pool_w),
                (B, C, H2, pool_h, W2, pool_w),
            ).reshape(B, C, H, W)
            x.accumulate_grad(spread if batched else spread[0], own=True)

        tape.record(out, bwd)
    return out


def max_pool1d(tape: Tape | None, x: Tensor, pool: int, stride: int | None = None) -> Tensor:
    """Max pooling along the last axis of a (B, C, L) input.

    Trailing positions that do not fill a whole window are dropped.
    """
    if stride is None:
        stride = pool
    x3, batched = _as_batched(x.data, 3)
    B, C, L = x3.shape
    if pool < 1 or pool > L or stride < 1:
        raise ShapeError(f"pool {pool} / stride {stride} invalid for length {L}")
    L2 = (L - pool) // stride + 1
    s0, s1, s2 = x3.strides
    win = as_strided(x3, (B, C, L2, pool), (s0, s1, s2 * stride, s2), writeable=False)
    out_data = win.max(axis=3)
    out = Tensor(out_data if batched else out_data[0])
    if tape is not None and x.needs_grad():
        pos = win.argmax(axis=3) + np.arange(L2)[None, None, :] * stride

        def bwd(g: np.ndarray) -> None:
            g3 = g if batched else g[None]
            dx = np.zeros_like(x3)
            bi, ci, _ = np.indices(pos.shape, sparse=True)
            np.add.at(dx, (bi, ci, pos), g3)
            x.accumulate_grad(dx if batched else dx[0], own=True)

        tape.record(out, bwd)
    return out


def global_max_pool1d(tape: Tape | None, x: Tensor) -> Tensor:
    """Max over the full last axis of a (B, C, L) input; output (B, C)."""
    x3, batched = _as_batched(x.data, 3)
    out_data = x3.max(axis=2)
    out = Tensor(out_data if batched else out_data[0])
    if tape is not None and x.needs_grad():
        idx = x3.argmax(axis=2)

        def bwd(g: np.ndarray) -> None:
            g2 = g if batched else g[None]
            dx = np.zeros_like(x3)
            bi, ci = np.indices(idx.shape, sparse=True)
            np.add.at(dx, (bi, ci, idx), g2)
            x.accumulate_grad(dx if batched else dx[0], own=True)

        tape.record(out, bwd)
    return out


def concat_channels(tape: Tape | None, a: Tensor, b: Tensor) -> Tensor:
    """Concatenate along the channel axis (axis 1 of batched arrays)."""
    if a.data.ndim < 2 or a.data.ndim != b.data.ndim:
        raise ShapeError(f"cannot concatenate shapes {a.shape} and {b.shape}")
    if a.shape[:1] + a.shape[2:] != b.shape[:1] + b.shape[2:]:
        raise ShapeError(f"non-channel dims differ: {a.shape} vs {b.shape}")
    out = Tensor(np.concatenate([a.data, b.data], axis=1))
    if tape is not None and (a.needs_grad() or b.needs_grad()):
        ca = a.shape[1]

        def bwd(g: np.ndarray) -> None:
            if a.needs_grad():
                a.accumulate_grad(g[:, :ca])
            if b.needs_grad():
                b.accumulate_grad(g[:, ca:])

        tape.record(out, bwd)
    return out


def flatten(tape: Tape | None, x: Tensor) -> Tensor:
    """Collapse all but the batch axis: (B, ...) -> (B, features)."""
    if x.data.ndim < 2:
        raise ShapeError(f"flatten expects a batched array, got shape {x.shape}")
    shape = x.data.shape
    out = Tensor(x.data.reshape(shape[0], -1))
    if tape is not None and x.needs_grad():

        def bwd(g: np.ndarray) -> None:
            x.accumulate_grad(g.reshape(shape))

        tape.record(out, bwd)
    return out


def linear(tape: Tape | None, x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Affine map x @ w.T + b with weights shaped (out_features, in_features)."""
    x2, batched = _as_batched(x.data, 2)
    if w.data.ndim != 2 or x2.shape[1] != w.data.shape[1]:
        raise ShapeError(f"linear mismatch: input {x.shape} vs weights {w.shape}")
    if b.data.shape != (w.data.shape[0],):
        raise ShapeError(f"bias must have shape ({w.data.shape[0]},), got {b.shape}")
    out_data = x2 @ w.data.T + b.data
    out = Tensor(out_data if batched else out_data[0])
    if tape is not None:

        def bwd(g: np.ndarray) -> None:
            g2 = g if batched else g[None]
            if w.needs_grad():
                w.accumulate_grad(g2.T @ x2, own=True)
            if b.needs_grad():
                b.accumulate_grad(g2.sum(axis=0), own=True)
            if x.needs_grad():
                dx = g2 @ w.data
                x.accumulate_grad(dx if batched else dx[0], own=True)

        tape.record(out, bwd)
    return out


def dropout(
    tape: Tape | None,
    x: Tensor,
    keep_rate: float,
    rng: np.random.Generator | None = None,
    training: bool = False,
) -> Tensor:
    """Inverted dropout: keep with probability keep_rate and rescale by 1/keep.

    Identity outside training or at keep_rate 1.0 (no op is recorded).
    """
    if not 0.0 < keep_rate <= 1.0:
        raise ValueError(f"keep_rate must be in (0, 1], got {keep_rate}")
    if not training or keep_rate == 1.0:
        return x
    if rng is None:
        raise ValueError("training-mode dropout needs an RNG")
    mask = rng.random(x.data.shape) < keep_rate
    out = Tensor(x.data * mask / keep_rate)
    if tape is not None and x.needs_grad():

        def bwd(g: np.ndarray) -> None:
            x.accumulate_grad(g * mask / keep_rate, own=True)

        tape.record(out, bwd)
    return out


def pad2d(
    tape: Tape | None, x: Tensor, pad_h: tuple[int, int], pad_w: tuple[int, int]
) -> Tensor:
    """Zero-pad the spatial axes of a (B, C, H, W) input by (before, after)."""
    x4, batched = _as_batched(x.data, 4)
    if min(pad_h) < 0 or min(pad_w) < 0:
        raise ShapeError(f"pad amounts must be >= 0, got {pad_h}, {pad_w}")
    B, C, H, W = x4.shape
    out_data = np.zeros((B, C, H + sum(pad_h), W + sum(pad_w)))
    out_data[:, :, pad_h[0] : pad_h[0] + H, pad_w[0] : pad_w[0] + W] = x4
    out = Tensor(out_data if batched else out_data[0])
    if tape is not None and x.needs_grad():
        H, W = x4.shape[2], x4.shape[3]

        def bwd(g: np.ndarray) -> None:
            g4 = g if batched else g[None]
            core = g4[:, :, pad_h[0] : pad_h[0] + H, pad_w[0] : pad_w[0] + W]
            x.accumulate_grad(core if batched else core[0])

        tape.record(out, bwd)
    return out


def elementwise_scale(tape: Tape | None, x: Tensor, factor: np.ndarray) -> Tensor:
    """Multiply by a constant (broadcastable) array, e.g. a padding mask."""
    factor = np.asarray(factor, dtype=np.float64)
    out = Tensor(x.data * factor)
    if out.shape != x.shape:
        raise ShapeError(f"factor {factor.shape} broadcasts {x.shape} to {out.shape}")
    if tape is not None and x.needs_grad():

        def bwd(g: np.ndarray) -> None:
            x.accumulate_grad(g * factor, own=True)

        tape.record(out, bwd)
    return out


def embedding(tape: Tape | None, table: Tensor, indices: np.ndarray) -> Tensor:
    """Gather columns of a (dim, vocab) table: indices (B, n) -> (B, dim, n)."""
    idx = np.asarray(indices)
    if idx.ndim != 2 or not np.issubdtype(idx.dtype, np.integer):
        raise ShapeError("indices must be a 2-d integer array")
    if idx.size == 0 or idx.min() < 0 or idx.max() >= table.data.shape[1]:
        raise ShapeError("index out of vocabulary range")
    out = Tensor(table.data[:, idx].transpose(1, 0, 2))
    if tape is not None and table.needs_grad():
        dim = table.data.shape[0]

        def bwd(g: np.ndarray) -> None:
            dt = np.zeros_like(table.data)
            np.add.at(dt.T, idx.ravel(), g.transpose(0, 2, 1).reshape(-1, dim))
            table.accumulate_grad(dt, own=True)

        tape.record(out, bwd)
    return out


def softmax_xent(tape: Tape | None, logits: Tensor, labels: np.ndarray) -> Tensor:
    """Mean cross-entropy over a (batch, classes) logit matrix.

    Numerically stable (log-sum-exp shifted by the row max); the adjoint of
    the logits is (softmax - one_hot) / batch.
    """
    z = logits.data
    if z.ndim != 2:
        raise ShapeError(f"logits must be (batch, classes), got shape {logits.shape}")
    y = np.asarray(labels)
    if y.shape != (z.shape[0],):
        raise ShapeError(f"labels must have shape ({z.shape[0]},), got {y.shape}")
    if y.min() < 0 or y.max() >= z.shape[1]:
        raise ValueError(f"labels must lie in 0..{z.shape[1] - 1}")
    zs = z - z.max(axis=1, keepdims=True)
    lse = np.log(np.exp(zs).sum(axis=1, keepdims=True))
    logp = zs - lse
    rows = np.arange(z.shape[0])
    out = Tensor(-logp[rows, y].mean())
    if tape is not None and logits.needs_grad():
        probs = np.exp(logp)

        def bwd(g: np.ndarray) -> None:
            gl = probs.copy()
            gl[rows, y] -= 1.0
            logits.accumulate_grad(gl * (float(g) / z.shape[0]), own=True)

        tape.record(out, bwd)
    return out

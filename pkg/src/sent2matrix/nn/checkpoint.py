"""Checkpoint files: text header plus raw little-endian float64 blocks.

Layout:

    s2mckpt1 <config_digest> <global_step>\n
    <param_count>\n
    then per parameter, in registry order:
    <name> <step_count> <ndim> <d0> <d1> ...\n
    followed by 3 * prod(shape) * 8 bytes: value, m1, m2.

Write/read round-trips bit-exactly (raw IEEE-754 bytes, no formatting).
"""
from __future__ import annotations

from pathlib import Path
from typing import Mapping

import numpy as np

from .tensor import Parameter


class CheckpointError(ValueError):
    """Raised on malformed checkpoint files or registry mismatches."""


_MAGIC = "s2mckpt1"


def save_checkpoint(
    path: str | Path,
    params: Mapping[str, Parameter],
    config_digest: str,
    global_step: int,
) -> None:
    with open(path, "wb") as f:
        f.write(f"{_MAGIC} {config_digest} {global_step}\n".encode("ascii"))
        f.write(f"{len(params)}\n".encode("ascii"))
        for name, p in params.items():
            if " " in name:
                raise CheckpointError(f"parameter name may not contain spaces: {name!r}")
            dims = " ".join(str(d) for d in p.data.shape)
            f.write(f"{name} {p.step_count} {p.data.ndim} {dims}\n".encode("ascii"))
            for arr in (p.data, p.m1, p.m2):
                f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path: str | Path, params: Mapping[str, Parameter]) -> tuple[str, int]:
    """Restore values and moments into an existing registry, in place.

    Returns (config_digest, global_step). The registry must contain exactly
    the stored parameter names with matching shapes.
    """
    with open(path, "rb") as f:
        head = f.readline().decode("ascii").split()
        if len(head) != 3 or head[0] != _MAGIC:
            raise CheckpointError(f"{path}: not a {_MAGIC} checkpoint")
        digest, global_step = head[1], int(head[2])
        count = int(f.readline().decode("ascii"))
        if count != len(params):
            raise CheckpointError(
                f"{path}: holds {count} parameters, registry has {len(params)}"
            )
        for _ in range(count):
            fields = f.readline().decode("ascii").split()
            name, step_count, ndim = fields[0], int(fields[1]), int(fields[2])
            shape = tuple(int(d) for d in fields[3 : 3 + ndim])
            if name not in params:
                raise CheckpointError(f"{path}: unexpected parameter {name!r}")
            p = params[name]
            if p.data.shape != shape:
                raise CheckpointError(
                    f"{path}: {name} has shape {shape}, registry expects {p.data.shape}"
                )
            n = int(np.prod(shape)) if shape else 1
            raw = f.read(3 * n * 8)
            if len(raw) != 3 * n * 8:
                raise CheckpointError(f"{path}: truncated block for {name!r}")
            block = np.frombuffer(raw, dtype="<f8")
            p.data[...] = block[:n].reshape(shape)
            p.m1[...] = block[n : 2 * n].reshape(shape)
            p.m2[...] = block[2 * n :].reshape(shape)
            p.step_count = step_count
    return digest, global_step

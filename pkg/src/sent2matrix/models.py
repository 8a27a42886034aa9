"""Model builders: dense word-matrix CNN and the two 1-D baselines.

All three share the same conventions: parameters live in an ordered
name -> Parameter registry, forward takes a batched input array (plus an
optional tape, training flag, and dropout RNG) and returns the logits
Tensor. Weights initialize from a zero-mean uniform scaled by
1/sqrt(fan_in); biases start at zero.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields

import numpy as np

from . import nn
from .encode import BASELINE_CHAR_DIM, CHAR_DIM, slice_count
from .nn import Parameter, Tape, Tensor
from .padding import STRATEGIES

ARCHES = ("sent2matrix_dense", "word_cnn", "char_cnn")

#: Parallel conv widths of the word-level baseline, 100 filters each.
WORD_CNN_KERNELS = (3, 4, 5)
WORD_CNN_FILTERS = 100

#: Character-level baseline stack: (kernel, pool-after) per conv layer.
CHAR_CNN_LAYERS = ((7, True), (7, True), (3, False), (3, False), (3, False), (3, True))


class ConfigError(ValueError):
    """Raised when a model configuration is invalid or cannot be built."""


@dataclass
class ModelConfig:
    arch: str = "sent2matrix_dense"
    n: int = 49
    m: int = 18
    padding: str = "serpentine"
    use_position: bool = False
    initial_filters: int = 64
    blocks: int = 2
    layers_per_block: int = 3
    growth: int = 32
    kernel: tuple[int, int] = (3, 2)
    fc_hidden: int = 256
    classes: int = 4
    dropout_keep: float = 0.5
    seed: int = 0
    embed_dim: int = 128
    word_vocab_cap: int = 20000

    def validate(self) -> None:
        if self.arch not in ARCHES:
            raise ConfigError(f"arch must be one of {ARCHES}, got {self.arch!r}")
        if self.padding not in STRATEGIES:
            raise ConfigError(f"padding must be one of {STRATEGIES}, got {self.padding!r}")
        if self.n < 1 or self.m < 1:
            raise ConfigError(f"capacities must be >= 1, got n={self.n}, m={self.m}")
        if self.blocks < 1 or self.layers_per_block < 1 or self.growth < 1:
            raise ConfigError("blocks, layers_per_block, and growth must be >= 1")
        if self.initial_filters < 1 or self.fc_hidden < 1:
            raise ConfigError("initial_filters and fc_hidden must be >= 1")
        if self.classes < 2:
            raise ConfigError(f"classes must be >= 2, got {self.classes}")
        if not 0.0 < self.dropout_keep <= 1.0:
            raise ConfigError(f"dropout_keep must be in (0, 1], got {self.dropout_keep}")
        if len(self.kernel) != 2 or min(self.kernel) < 1:
            raise ConfigError(f"kernel must be two sizes >= 1, got {self.kernel}")
        if self.embed_dim < 1 or self.word_vocab_cap < 2:
            raise ConfigError("embed_dim must be >= 1 and word_vocab_cap >= 2")

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "kernel":
                v = f"{v[0]},{v[1]}"
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ModelConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for ln, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith(("#", ";")):
                continue
            if "=" not in line:
                raise ConfigError(f"line {ln}: expected 'key = value', got {raw!r}")
            key, _, val = line.partition("=")
            key, val = key.strip(), val.strip()
            if key not in known:
                raise ConfigError(f"line {ln}: unknown key {key!r}")
            kwargs[key] = _parse_value(key, val)
        config = cls(**kwargs)
        config.validate()
        return config

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode("ascii")).hexdigest()[:16]


def _parse_value(key: str, val: str):
    if key == "kernel":
        parts = val.split(",")
        if len(parts) != 2:
            raise ConfigError(f"kernel must be 'k1,k2', got {val!r}")
        return (int(parts[0]), int(parts[1]))
    if key in ("arch", "padding"):
        return val
    if key == "use_position":
        if val not in ("true", "false"):
            raise ConfigError(f"use_position must be true or false, got {val!r}")
        return val == "true"
    if key == "dropout_keep":
        return float(val)
    return int(val)


def _uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    scale = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-scale, scale, size=shape)


class Model:
    """A built network: ordered parameter registry plus a forward pass."""

    arch = ""

    def __init__(self, config: ModelConfig) -> None:
        config.validate()
        self.config = config
        self.params: dict[str, Parameter] = {}

    def _add(self, name: str, array: np.ndarray) -> Parameter:
        p = Parameter(array)
        self.params[name] = p
        return p

    def parameters(self) -> list[Parameter]:
        return list(self.params.values())

    def param_count(self) -> int:
        return sum(p.size for p in self.parameters())

    def forward(
        self,
        x: np.ndarray,
        tape: Tape | None = None,
        training: bool = False,
        rng: np.random.Generator | None = None,
    ) -> Tensor:
        raise NotImplementedError


class Sent2MatrixDense(Model):
    """Stem conv (stride 2 on the word axis) + dense blocks + 2-layer head.

    Inside a block every layer convolves the running concatenation of the
    block input and all previous layer outputs, on feature maps explicitly
    zero-padded to preserve spatial size; 2x2 average pooling sits between
    consecutive blocks. Input layout is (batch, channels, m, word_slices).
    """

    arch = "sent2matrix_dense"

    def __init__(self, config: ModelConfig, rng: np.random.Generator | None = None) -> None:
        super().__init__(config)
        if rng is None:
            rng = np.random.default_rng(config.seed)
        k1, k2 = config.kernel
        self.in_channels = CHAR_DIM + (config.m if config.use_position else 0)
        self.in_h = config.m
        self.in_w = slice_count(config.n, config.padding)
        if k1 > self.in_h or k2 > self.in_w:
            raise ConfigError(
                f"kernel {k1}x{k2} exceeds input {self.in_h}x{self.in_w}"
            )
        self.pad_h = ((k1 - 1) // 2, k1 - 1 - (k1 - 1) // 2)
        self.pad_w = ((k2 - 1) // 2, k2 - 1 - (k2 - 1) // 2)

        fan = self.in_channels * k1 * k2
        self._add("stem.w", _uniform(rng, (config.initial_filters, self.in_channels, k1, k2), fan))
        self._add("stem.b", np.zeros(config.initial_filters))
        h = self.in_h - k1 + 1
        w = (self.in_w - k2) // 2 + 1
        channels = config.initial_filters
        for b in range(config.blocks):
            if b > 0:
                if h % 2 or w % 2 or h < 2 or w < 2:
                    raise ConfigError(
                        f"cannot 2x2-pool a {h}x{w} map before block {b + 1}; "
                        "adjust n, m, kernel, or blocks"
                    )
                h //= 2
                w //= 2
            for l in range(config.layers_per_block):
                fan = channels * k1 * k2
                self._add(
                    f"block{b + 1}.conv{l + 1}.w",
                    _uniform(rng, (config.growth, channels, k1, k2), fan),
                )
                self._add(f"block{b + 1}.conv{l + 1}.b", np.zeros(config.growth))
                channels += config.growth
        self.out_h, self.out_w, self.out_channels = h, w, channels
        flat = channels * h * w
        self._add("fc1.w", _uniform(rng, (config.fc_hidden, flat), flat))
        self._add("fc1.b", np.zeros(config.fc_hidden))
        self._add("fc2.w", _uniform(rng, (config.classes, config.fc_hidden), config.fc_hidden))
        self._add("fc2.b", np.zeros(config.classes))

    def forward(self, x, tape=None, training=False, rng=None) -> Tensor:
        t = x if isinstance(x, Tensor) else Tensor(x)
        p = self.params
        t = nn.conv2d(tape, t, p["stem.w"], p["stem.b"], stride_h=1, stride_w=2)
        t = nn.relu(tape, t)
        cfg = self.config
        for b in range(cfg.blocks):
            if b > 0:
                t = nn.avg_pool2d(tape, t, 2, 2)
            for l in range(cfg.layers_per_block):
                branch = nn.pad2d(tape, t, self.pad_h, self.pad_w)
                branch = nn.conv2d(
                    tape,
                    branch,
                    p[f"block{b + 1}.conv{l + 1}.w"],
                    p[f"block{b + 1}.conv{l + 1}.b"],
                )
                branch = nn.relu(tape, branch)
                t = nn.concat_channels(tape, t, branch)
        t = nn.flatten(tape, t)
        t = nn.linear(tape, t, p["fc1.w"], p["fc1.b"])
        t = nn.relu(tape, t)
        t = nn.dropout(tape, t, cfg.dropout_keep, rng=rng, training=training)
        return nn.linear(tape, t, p["fc2.w"], p["fc2.b"])


class WordCnn(Model):
    """Word-index baseline: trained-from-scratch embedding, parallel conv
    banks of widths 3/4/5 (100 filters each), global max over time, dropout,
    and a linear classifier. Input is a (batch, n) integer index array.
    """

    arch = "word_cnn"

    def __init__(
        self,
        config: ModelConfig,
        vocab_size: int,
        rng: np.random.Generator | None = None,
    ) -> None:
        super().__init__(config)
        if vocab_size < 2:
            raise ConfigError(f"vocab_size must be >= 2, got {vocab_size}")
        if config.n < max(WORD_CNN_KERNELS):
            raise ConfigError(
                f"word capacity n={config.n} is below the widest kernel "
                f"{max(WORD_CNN_KERNELS)}"
            )
        if rng is None:
            rng = np.random.default_rng(config.seed)
        self.vocab_size = vocab_size
        self._add("embed.w", _uniform(rng, (config.embed_dim, vocab_size), vocab_size))
        for k in WORD_CNN_KERNELS:
            fan = config.embed_dim * k
            self._add(f"conv{k}.w", _uniform(rng, (WORD_CNN_FILTERS, config.embed_dim, k), fan))
            self._add(f"conv{k}.b", np.zeros(WORD_CNN_FILTERS))
        total = WORD_CNN_FILTERS * len(WORD_CNN_KERNELS)
        self._add("fc.w", _uniform(rng, (config.classes, total), total))
        self._add("fc.b", np.zeros(config.classes))

    def forward(self, x, tape=None, training=False, rng=None) -> Tensor:
        # x holds word indices, -1 marking padding columns past the sentence
        # end; those columns embed to exact zeros (and block their gradient).
        idx = np.asarray(x)
        p = self.params
        e = nn.embedding(tape, p["embed.w"], np.maximum(idx, 0))
        e = nn.elementwise_scale(tape, e, (idx >= 0)[:, None, :].astype(np.float64))
        pooled = None
        for k in WORD_CNN_KERNELS:
            c = nn.conv1d(tape, e, p[f"conv{k}.w"], p[f"conv{k}.b"])
            c = nn.relu(tape, c)
            v = nn.global_max_pool1d(tape, c)
            pooled = v if pooled is None else nn.concat_channels(tape, pooled, v)
        pooled = nn.dropout(tape, pooled, self.config.dropout_keep, rng=rng, training=training)
        return nn.linear(tape, pooled, p["fc.w"], p["fc.b"])


class CharCnn(Model):
    """Flat character baseline over the 27-symbol alphabet (a-z + separator).

    Six conv layers (kernels 7,7,3,3,3,3; width-3 max pooling after layers
    1, 2, and 6) then two hidden linear layers with dropout. Input is a
    (batch, 27, n*(m+1)) one-hot array.
    """

    arch = "char_cnn"

    def __init__(self, config: ModelConfig, rng: np.random.Generator | None = None) -> None:
        super().__init__(config)
        if rng is None:
            rng = np.random.default_rng(config.seed)
        length = config.n * (config.m + 1)
        channels = BASELINE_CHAR_DIM
        for i, (k, pool) in enumerate(CHAR_CNN_LAYERS, start=1):
            if length < k:
                raise ConfigError(
                    f"sequence collapsed to {length} columns before conv{i} (kernel {k}); "
                    "n*(m+1) is too small for this stack"
                )
            fan = channels * k
            self._add(f"conv{i}.w", _uniform(rng, (config.initial_filters, channels, k), fan))
            self._add(f"conv{i}.b", np.zeros(config.initial_filters))
            channels = config.initial_filters
            length = length - k + 1
            if pool:
                if length < 3:
                    raise ConfigError(f"sequence collapsed to {length} columns at pool {i}")
                length //= 3
        self.in_length = config.n * (config.m + 1)
        flat = channels * length
        self._add("fc1.w", _uniform(rng, (config.fc_hidden, flat), flat))
        self._add("fc1.b", np.zeros(config.fc_hidden))
        self._add("fc2.w", _uniform(rng, (config.fc_hidden, config.fc_hidden), config.fc_hidden))
        self._add("fc2.b", np.zeros(config.fc_hidden))
        self._add("fc3.w", _uniform(rng, (config.classes, config.fc_hidden), config.fc_hidden))
        self._add("fc3.b", np.zeros(config.classes))

    def forward(self, x, tape=None, training=False, rng=None) -> Tensor:
        t = x if isinstance(x, Tensor) else Tensor(x)
        p = self.params
        for i, (_, pool) in enumerate(CHAR_CNN_LAYERS, start=1):
            t = nn.conv1d(tape, t, p[f"conv{i}.w"], p[f"conv{i}.b"])
            t = nn.relu(tape, t)
            if pool:
                t = nn.max_pool1d(tape, t, 3)
        t = nn.flatten(tape, t)
        keep = self.config.dropout_keep
        t = nn.linear(tape, t, p["fc1.w"], p["fc1.b"])
        t = nn.relu(tape, t)
        t = nn.dropout(tape, t, keep, rng=rng, training=training)
        t = nn.linear(tape, t, p["fc2.w"], p["fc2.b"])
        t = nn.relu(tape, t)
        t = nn.dropout(tape, t, keep, rng=rng, training=training)
        return nn.linear(tape, t, p["fc3.w"], p["fc3.b"])


def build_sent2matrix(config: ModelConfig) -> Sent2MatrixDense:
    if config.arch != "sent2matrix_dense":
        raise ConfigError(f"expected arch sent2matrix_dense, got {config.arch!r}")
    return Sent2MatrixDense(config)


def build_word_cnn(config: ModelConfig, vocab_size: int) -> WordCnn:
    if config.arch != "word_cnn":
        raise ConfigError(f"expected arch word_cnn, got {config.arch!r}")
    return WordCnn(config, vocab_size)


def build_char_cnn(config: ModelConfig) -> CharCnn:
    if config.arch != "char_cnn":
        raise ConfigError(f"expected arch char_cnn, got {config.arch!r}")
    return CharCnn(config)


def predict(model: Model, x: np.ndarray) -> np.ndarray:
    """Evaluation-mode class indices; logit ties go to the lowest index."""
    logits = model.forward(x, tape=None, training=False)
    return np.argmax(logits.data, axis=1)

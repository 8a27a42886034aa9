"""Deterministic training/evaluation loops and experiment recipes.

A run is a pure function of (experiment config, seed): the validation
split, per-epoch shuffles, weight init, and dropout masks all derive from
the seed, reductions happen in a fixed order, and two identical runs
produce bit-identical checkpoints and report files. Wall-clock timing is
deliberately kept out of the report file (it goes to a separate timing
artifact) so reports can be compared byte for byte.
"""
from __future__ import annotations

import configparser
import csv
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import nn
from .data import DataError, DatasetSpec, FORMATS, load_dataset
from .encode import encode_baseline_batch, encode_batch
from .models import (
    CharCnn,
    ConfigError,
    Model,
    ModelConfig,
    Sent2MatrixDense,
    WordCnn,
)
from .nn import Tape, adam_step, backward, save_checkpoint, softmax_xent, zero_grads
from .padding import STRATEGIES
from .text import TokenizedSentence, WordVocab, build_word_vocab, dump_word_vocab

VALIDATION_FRACTION = 0.05

Sample = tuple[int, TokenizedSentence]


@dataclass
class TrainParams:
    epochs: int = 20
    batch_size: int = 512
    lr: float = 0.001
    subsample: int | None = None
    out_dir: str | None = None
    keep_epoch_checkpoints: bool = False


@dataclass
class Metrics:
    correct: int
    total: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.total


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_acc: float
    val_acc: float | None


@dataclass
class TrainReport:
    epochs: list[EpochStats]
    test: Metrics
    seed: int
    config_digest: str
    wall_clock: float = 0.0

    def to_text(self) -> str:
        """Stable-field-order epoch records plus a summary block (no timing)."""
        lines = []
        for e in self.epochs:
            val = "na" if e.val_acc is None else f"{e.val_acc:.6f}"
            lines.append(
                f"epoch={e.epoch:03d} train_loss={e.train_loss:.12e} "
                f"train_acc={e.train_acc:.6f} val_acc={val}"
            )
        lines.append(
            f"final test_acc={self.test.accuracy:.6f} "
            f"correct={self.test.correct} total={self.test.total}"
        )
        lines.append(f"seed={self.seed} config={self.config_digest} epochs={len(self.epochs)}")
        return "\n".join(lines) + "\n"


def encode_inputs(
    config: ModelConfig, sents: list[TokenizedSentence], vocab: WordVocab | None = None
) -> np.ndarray:
    """Architecture-specific batch encoding, ready for Model.forward."""
    if config.arch == "sent2matrix_dense":
        batch = encode_batch(sents, config.n, config.m, config.padding, config.use_position)
        # (batch, slices, m, channels) -> (batch, channels, m, slices)
        return np.ascontiguousarray(batch.transpose(0, 3, 2, 1))
    if config.arch == "word_cnn":
        if vocab is None:
            raise ConfigError("word_cnn encoding needs a word vocabulary")
        idx = np.full((len(sents), config.n), -1, dtype=np.int64)
        for i, s in enumerate(sents):
            for j, w in enumerate(s.words[: config.n]):
                idx[i, j] = vocab.index(w)
        return idx
    if config.arch == "char_cnn":
        return encode_baseline_batch(sents, config.n * (config.m + 1))
    raise ConfigError(f"unknown arch {config.arch!r}")


def build_model(config: ModelConfig, vocab: WordVocab | None = None) -> Model:
    if config.arch == "sent2matrix_dense":
        return Sent2MatrixDense(config)
    if config.arch == "word_cnn":
        if vocab is None:
            raise ConfigError("word_cnn needs a word vocabulary")
        return WordCnn(config, len(vocab))
    if config.arch == "char_cnn":
        return CharCnn(config)
    raise ConfigError(f"unknown arch {config.arch!r}")


def evaluate(
    model: Model,
    samples: list[Sample],
    vocab: WordVocab | None = None,
    batch_size: int = 512,
) -> tuple[Metrics, list[int]]:
    """Exact accuracy over a split, plus per-sample predicted classes."""
    if not samples:
        raise DataError("cannot evaluate an empty split")
    correct = 0
    preds: list[int] = []
    for lo in range(0, len(samples), batch_size):
        chunk = samples[lo : lo + batch_size]
        x = encode_inputs(model.config, [s for _, s in chunk], vocab)
        logits = model.forward(x, tape=None, training=False)
        p = logits.data.argmax(axis=1)
        preds.extend(int(v) for v in p)
        correct += int((p == np.array([lab for lab, _ in chunk])).sum())
    return Metrics(correct, len(samples)), preds


def _write_predictions(path: Path, samples: list[Sample], preds: list[int]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["index", "true", "pred"])
        for i, ((label, _), pred) in enumerate(zip(samples, preds)):
            w.writerow([i, label, pred])


def train(
    config: ModelConfig, spec: DatasetSpec, params: TrainParams
) -> tuple[Model, TrainReport]:
    """Train one model; returns it along with the per-epoch report.

    Each epoch visits a fresh seeded permutation of the training pool in
    mini-batches (the last batch may be short); 5% of the training file is
    held out for validation before any subsampling, and a subsampled run
    trains on a prefix of the seeded permutation of the remainder.
    """
    t0 = time.perf_counter()
    if params.epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {params.epochs}")
    if params.batch_size < 1:
        raise ValueError(f"batch_size must be >= 1, got {params.batch_size}")
    config.validate()
    spec.validate()
    if (config.n, config.m) != (spec.n, spec.m) or config.classes != spec.classes:
        raise ConfigError(
            f"model capacities (n={config.n}, m={config.m}, classes={config.classes}) "
            f"disagree with dataset {spec.name} "
            f"(n={spec.n}, m={spec.m}, classes={spec.classes})"
        )
    train_res, test_res = load_dataset(spec)
    if not train_res.samples:
        raise DataError(f"{spec.train_path}: no usable training rows")

    n_total = len(train_res.samples)
    perm = np.random.default_rng([config.seed, 101]).permutation(n_total)
    n_val = int(round(VALIDATION_FRACTION * n_total))
    val = [train_res.samples[i] for i in perm[:n_val]]
    pool_idx = perm[n_val:]
    if params.subsample is not None and params.subsample > 0:
        if params.subsample > len(pool_idx):
            raise ValueError(
                f"subsample {params.subsample} exceeds the {len(pool_idx)}-sample pool"
            )
        pool_idx = pool_idx[: params.subsample]
    pool = [train_res.samples[i] for i in pool_idx]
    if not pool:
        raise DataError("training pool is empty after validation split/subsampling")

    vocab = None
    if config.arch == "word_cnn":
        vocab = build_word_vocab((s for _, s in pool), config.word_vocab_cap)
    model = build_model(config, vocab)

    shuffle_rng = np.random.default_rng([config.seed, 202])
    dropout_rng = np.random.default_rng([config.seed, 303])

    run_dir: Path | None = None
    if params.out_dir is not None:
        run_dir = Path(params.out_dir) / f"{config.digest()}_s{config.seed}"
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "config.model.ini").write_text(config.to_text(), encoding="ascii")
        if vocab is not None:
            (run_dir / "vocab.tsv").write_text(dump_word_vocab(vocab), encoding="utf-8")

    digest = config.digest()
    stats: list[EpochStats] = []
    global_step = 0
    for epoch in range(1, params.epochs + 1):
        order = shuffle_rng.permutation(len(pool))
        loss_sum = 0.0
        correct = 0
        for lo in range(0, len(pool), params.batch_size):
            batch = [pool[i] for i in order[lo : lo + params.batch_size]]
            x = encode_inputs(config, [s for _, s in batch], vocab)
            y = np.array([lab for lab, _ in batch])
            tape = Tape()
            logits = model.forward(x, tape, training=True, rng=dropout_rng)
            loss = softmax_xent(tape, logits, y)
            zero_grads(model.parameters())
            backward(tape, loss)
            adam_step(model.parameters(), lr=params.lr)
            global_step += 1
            loss_sum += float(loss.data) * len(batch)
            correct += int((logits.data.argmax(axis=1) == y).sum())
        val_acc = None
        if val:
            val_metrics, _ = evaluate(model, val, vocab, params.batch_size)
            val_acc = val_metrics.accuracy
        stats.append(EpochStats(epoch, loss_sum / len(pool), correct / len(pool), val_acc))
        if run_dir is not None:
            save_checkpoint(run_dir / "ckpt_latest.ckpt", model.params, digest, global_step)
            if params.keep_epoch_checkpoints:
                save_checkpoint(
                    run_dir / f"ckpt_epoch_{epoch:03d}.ckpt", model.params, digest, global_step
                )

    test_metrics, preds = evaluate(model, test_res.samples, vocab, params.batch_size)
    report = TrainReport(
        epochs=stats,
        test=test_metrics,
        seed=config.seed,
        config_digest=digest,
        wall_clock=time.perf_counter() - t0,
    )
    if run_dir is not None:
        save_checkpoint(run_dir / "ckpt_final.ckpt", model.params, digest, global_step)
        (run_dir / "report.txt").write_text(report.to_text(), encoding="ascii")
        (run_dir / "timing.txt").write_text(
            f"wall_clock_seconds={report.wall_clock:.3f}\n", encoding="ascii"
        )
        _write_predictions(run_dir / "predictions_test.csv", test_res.samples, preds)
    return model, report


@dataclass
class PaddingComparison:
    """Accuracy per padding strategy over a common set of seeds."""

    results: dict[str, list[tuple[int, float]]] = field(default_factory=dict)

    def mean(self, strategy: str) -> float:
        vals = [a for _, a in self.results[strategy]]
        return sum(vals) / len(vals)

    def to_text(self) -> str:
        lines = [f"{'padding':<12} {'mean_acc':>8}  per_seed"]
        for strategy in STRATEGIES:
            if strategy not in self.results:
                continue
            per_seed = " ".join(f"s{s}={a:.4f}" for s, a in self.results[strategy])
            lines.append(f"{strategy:<12} {self.mean(strategy):>8.4f}  {per_seed}")
        return "\n".join(lines) + "\n"


def compare_paddings(
    spec: DatasetSpec,
    base_config: ModelConfig,
    seeds: list[int],
    params: TrainParams,
) -> PaddingComparison:
    """Train the same architecture under all three padding strategies."""
    if not seeds:
        raise ValueError("need at least one seed")
    comparison = PaddingComparison({s: [] for s in STRATEGIES})
    for strategy in STRATEGIES:
        for seed in seeds:
            cfg = replace(base_config, padding=strategy, seed=seed)
            _, report = train(cfg, spec, params)
            comparison.results[strategy].append((seed, report.test.accuracy))
    return comparison


_DATA_KEYS = {"name", "train_path", "test_path", "classes", "n", "m", "format"}
_TRAIN_KEYS = {"epochs", "batch_size", "lr", "subsample", "out", "keep_epoch_checkpoints"}


@dataclass
class Experiment:
    spec: DatasetSpec
    model: ModelConfig
    params: TrainParams


def load_experiment(path: str | Path) -> Experiment:
    """Parse an INI experiment file with [data], [model], [train] sections.

    Unknown sections or keys are errors; [model] capacities default to the
    dataset's and must agree when given explicitly.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, encoding="utf-8") as f:
            cp.read_file(f)
    except OSError as exc:
        raise ConfigError(f"cannot read experiment config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    unknown_sections = set(cp.sections()) - {"data", "model", "train"}
    if unknown_sections or "data" not in cp:
        raise ConfigError(
            f"{path}: expected sections [data], [model], [train]; "
            f"got {cp.sections()}"
        )

    data = dict(cp["data"])
    bad = set(data) - _DATA_KEYS
    if bad:
        raise ConfigError(f"{path}: unknown [data] keys {sorted(bad)}")
    for req in ("train_path", "test_path", "classes", "n", "m"):
        if req not in data:
            raise ConfigError(f"{path}: [data] is missing {req!r}")
    if data.get("format", "csv2") not in FORMATS:
        raise ConfigError(f"{path}: bad format {data.get('format')!r}")
    spec = DatasetSpec(
        name=data.get("name", "dataset"),
        train_path=data["train_path"],
        test_path=data["test_path"],
        classes=int(data["classes"]),
        n=int(data["n"]),
        m=int(data["m"]),
        format=data.get("format", "csv2"),
    )
    spec.validate()

    model_items = dict(cp["model"]) if "model" in cp else {}
    for cap in ("n", "m", "classes"):
        given = model_items.get(cap)
        if given is not None and int(given) != getattr(spec, cap):
            raise ConfigError(
                f"{path}: [model] {cap}={given} disagrees with [data] {cap}"
            )
        model_items[cap] = str(getattr(spec, cap))
    model_text = "\n".join(f"{k} = {v}" for k, v in model_items.items())
    model = ModelConfig.from_text(model_text)

    tr = dict(cp["train"]) if "train" in cp else {}
    bad = set(tr) - _TRAIN_KEYS
    if bad:
        raise ConfigError(f"{path}: unknown [train] keys {sorted(bad)}")
    subsample = int(tr.get("subsample", "0")) or None
    params = TrainParams(
        epochs=int(tr.get("epochs", "20")),
        batch_size=int(tr.get("batch_size", "512")),
        lr=float(tr.get("lr", "0.001")),
        subsample=subsample,
        out_dir=tr.get("out"),
        keep_epoch_checkpoints=tr.get("keep_epoch_checkpoints", "false") == "true",
    )
    return Experiment(spec, model, params)

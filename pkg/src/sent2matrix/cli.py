"""Command-line interface.

Subcommands: encode, train, eval, compare-paddings, gradcheck,
fold-visualize. Exit status: 0 success, 1 usage/config error, 2 data
error, 3 numerical-check failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import checks
from .data import DataError, load_split
from .encode import encode_batch, write_tensor_dump
from .harness import evaluate, load_experiment, train, compare_paddings
from .models import ConfigError
from .nn import load_checkpoint
from .padding import PAD, STRATEGIES, pad_cyclic, pad_zero, fold_render
from .text import normalize, tokenize


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we own the status codes
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="sent2matrix")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    enc = sub.add_parser("encode", help="write an encoded batch as a binary dump")
    enc.add_argument("--config", help="experiment INI; encodes the training split")
    enc.add_argument("--text", help="encode a single sentence instead of a dataset")
    enc.add_argument("--m", type=int, default=18)
    enc.add_argument("--strategy", choices=STRATEGIES, default="serpentine")
    enc.add_argument("--position", choices=("on", "off"), default="off")
    enc.add_argument("--subsample", type=int, default=0)
    enc.add_argument("--out", required=True, help="output file for the dump")

    tr = sub.add_parser("train", help="train a model from an experiment INI")
    tr.add_argument("--config", required=True)
    tr.add_argument("--seed", type=int)
    tr.add_argument("--epochs", type=int)
    tr.add_argument("--subsample", type=int)
    tr.add_argument("--strategy", choices=STRATEGIES)
    tr.add_argument("--out", help="runs root (overrides [train] out)")

    ev = sub.add_parser("eval", help="re-evaluate a trained run's final checkpoint")
    ev.add_argument("--config", required=True)
    ev.add_argument("--seed", type=int)
    ev.add_argument("--strategy", choices=STRATEGIES)
    ev.add_argument("--out", help="runs root (overrides [train] out)")

    cmp_ = sub.add_parser("compare-paddings", help="train under all three paddings")
    cmp_.add_argument("--config", required=True)
    cmp_.add_argument("--seeds", default="0,1,2", help="comma-separated seed list")
    cmp_.add_argument("--epochs", type=int)
    cmp_.add_argument("--subsample", type=int)
    cmp_.add_argument("--out", help="runs root (overrides [train] out)")

    gc = sub.add_parser("gradcheck", help="finite-difference checks per layer family")
    gc.add_argument("--seed", type=int, default=7)

    fv = sub.add_parser("fold-visualize", help="print the padded word grid of a sentence")
    fv.add_argument("--text", required=True)
    fv.add_argument("--m", type=int, default=18)
    fv.add_argument("--strategy", choices=STRATEGIES, default="serpentine")
    return p


def _apply_overrides(exp, args):
    if getattr(args, "seed", None) is not None:
        exp.model = replace(exp.model, seed=args.seed)
    if getattr(args, "strategy", None) is not None:
        exp.model = replace(exp.model, padding=args.strategy)
    if getattr(args, "epochs", None) is not None:
        exp.params.epochs = args.epochs
    if getattr(args, "subsample", None) is not None:
        exp.params.subsample = args.subsample or None
    if getattr(args, "out", None) is not None:
        exp.params.out_dir = args.out
    return exp


def _run_dir(exp) -> Path:
    if exp.params.out_dir is None:
        raise UsageError("no output directory: set [train] out or pass --out")
    return Path(exp.params.out_dir) / f"{exp.model.digest()}_s{exp.model.seed}"


def _cmd_encode(args) -> int:
    if (args.text is None) == (args.config is None):
        raise UsageError("encode needs exactly one of --text or --config")
    if args.text is not None:
        sent = tokenize(normalize(args.text))
        n = max(1, len(sent.words))
        batch = encode_batch([sent], n, args.m, args.strategy, args.position == "on")
    else:
        exp = load_experiment(args.config)
        res = load_split(exp.spec.train_path, exp.spec)
        sents = [s for _, s in res.samples]
        if args.subsample:
            sents = sents[: args.subsample]
        batch = encode_batch(
            sents, exp.model.n, exp.model.m, exp.model.padding, exp.model.use_position
        )
    with open(args.out, "wb") as f:
        write_tensor_dump(f, batch)
    print(f"wrote {batch.shape[0]} tensor(s) of shape {batch.shape[1:]} to {args.out}")
    return 0


def _cmd_train(args) -> int:
    exp = _apply_overrides(load_experiment(args.config), args)
    _, report = train(exp.model, exp.spec, exp.params)
    sys.stdout.write(report.to_text())
    if exp.params.out_dir is not None:
        print(f"artifacts: {_run_dir(exp)}")
    return 0


def _cmd_eval(args) -> int:
    exp = _apply_overrides(load_experiment(args.config), args)
    run_dir = _run_dir(exp)
    ckpt = run_dir / "ckpt_final.ckpt"
    if not ckpt.exists():
        raise DataError(f"no final checkpoint at {ckpt}; train first")
    # rebuild the model (and, for the word baseline, its vocabulary) exactly
    # as train did, then restore the stored weights
    from .harness import build_model, encode_inputs  # noqa: F401
    from .text import build_word_vocab
    import numpy as np

    train_res = load_split(exp.spec.train_path, exp.spec)
    vocab = None
    if exp.model.arch == "word_cnn":
        n_total = len(train_res.samples)
        perm = np.random.default_rng([exp.model.seed, 101]).permutation(n_total)
        n_val = int(round(0.05 * n_total))
        pool_idx = perm[n_val:]
        if exp.params.subsample:
            pool_idx = pool_idx[: exp.params.subsample]
        pool = [train_res.samples[i] for i in pool_idx]
        vocab = build_word_vocab((s for _, s in pool), exp.model.word_vocab_cap)
    model = build_model(exp.model, vocab)
    load_checkpoint(ckpt, model.params)
    test_res = load_split(exp.spec.test_path, exp.spec)
    metrics, preds = evaluate(model, test_res.samples, vocab, exp.params.batch_size)
    import csv as _csv

    with open(run_dir / "predictions_eval.csv", "w", newline="", encoding="utf-8") as f:
        w = _csv.writer(f)
        w.writerow(["index", "true", "pred"])
        for i, ((label, _), pred) in enumerate(zip(test_res.samples, preds)):
            w.writerow([i, label, pred])
    print(f"test_acc={metrics.accuracy:.6f} correct={metrics.correct} total={metrics.total}")
    return 0


def _cmd_compare(args) -> int:
    exp = _apply_overrides(load_experiment(args.config), args)
    try:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip() != ""]
    except ValueError:
        raise UsageError(f"bad --seeds value {args.seeds!r}") from None
    if not seeds:
        raise UsageError("need at least one seed")
    comparison = compare_paddings(exp.spec, exp.model, seeds, exp.params)
    text = comparison.to_text()
    sys.stdout.write(text)
    if exp.params.out_dir is not None:
        out = Path(exp.params.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "padding_comparison.txt").write_text(text, encoding="ascii")
    return 0


def _cmd_gradcheck(args) -> int:
    errors = checks.run_all(args.seed)
    failed = False
    for family, err in errors.items():
        status = "ok" if err <= checks.GRAD_TOLERANCE else "FAIL"
        failed = failed or err > checks.GRAD_TOLERANCE
        print(f"{family:<18} max_rel_err={err:.3e}  {status}")
    return 3 if failed else 0


def _cmd_fold(args) -> int:
    words = tokenize(normalize(args.text)).words
    if not words:
        raise DataError("text contains no encodable words")
    if args.m < 1:
        raise UsageError("--m must be >= 1")
    if args.strategy == "serpentine":
        print(fold_render(words, args.m))
    else:
        pad = pad_zero if args.strategy == "zero" else pad_cyclic
        for w in words:
            cols = pad(w[: args.m], args.m).columns
            print("".join("." if c is PAD else c for c in cols))
    return 0


_COMMANDS = {
    "encode": _cmd_encode,
    "train": _cmd_train,
    "eval": _cmd_eval,
    "compare-paddings": _cmd_compare,
    "gradcheck": _cmd_gradcheck,
    "fold-visualize": _cmd_fold,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

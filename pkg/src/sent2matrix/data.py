"""Dataset specs and CSV ingestion.

Two on-disk forms are read, both with 1-based integer labels as
distributed: two-column `label,text` and the three-column news form
`label,title,description` (title and description joined by one space).
Structurally malformed rows (wrong column count, non-integer label) are
counted and reported, never silently dropped; a label outside the declared
class range is a hard error.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .text import TokenizedSentence, normalize, tokenize

log = logging.getLogger(__name__)

FORMATS = ("csv2", "csv3")

#: Word/character capacities and class counts of the reference corpora.
BUILTIN_DATASETS = {
    "ag_news": {"classes": 4, "n": 49, "m": 18, "format": "csv3"},
    "yelp_full": {"classes": 5, "n": 67, "m": 18, "format": "csv2"},
    "mr": {"classes": 2, "n": 51, "m": 18, "format": "csv2"},
}


class DataError(Exception):
    """Raised on unreadable files, bad labels, or empty splits."""


@dataclass
class DatasetSpec:
    name: str
    train_path: str
    test_path: str
    classes: int
    n: int
    m: int
    format: str = "csv2"

    def validate(self) -> None:
        if self.n < 1 or self.m < 1:
            raise DataError(f"capacities must be >= 1, got n={self.n}, m={self.m}")
        if self.classes < 2:
            raise DataError(f"classes must be >= 2, got {self.classes}")
        if self.format not in FORMATS:
            raise DataError(f"format must be one of {FORMATS}, got {self.format!r}")


def builtin_spec(name: str, data_dir: str | Path) -> DatasetSpec:
    """Spec for a known corpus laid out as <dir>/<name>.{train,test}.csv."""
    if name not in BUILTIN_DATASETS:
        raise DataError(f"unknown dataset {name!r}; known: {sorted(BUILTIN_DATASETS)}")
    meta = BUILTIN_DATASETS[name]
    d = Path(data_dir)
    return DatasetSpec(
        name=name,
        train_path=str(d / f"{name}.train.csv"),
        test_path=str(d / f"{name}.test.csv"),
        **meta,
    )


@dataclass
class LoadResult:
    samples: list[tuple[int, TokenizedSentence]]
    malformed: int


def load_split(path: str | Path, spec: DatasetSpec) -> LoadResult:
    """Read one CSV split into (0-based label, TokenizedSentence) pairs."""
    spec.validate()
    want = 2 if spec.format == "csv2" else 3
    samples: list[tuple[int, TokenizedSentence]] = []
    malformed = 0
    try:
        f = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with f:
        for i, row in enumerate(csv.reader(f)):
            if len(row) != want:
                malformed += 1
                continue
            try:
                raw_label = int(row[0])
            except ValueError:
                malformed += 1
                continue
            label = raw_label - 1
            if not 0 <= label < spec.classes:
                raise DataError(
                    f"{path}, row {i + 1}: label {raw_label} outside 1..{spec.classes}"
                )
            text = row[1] if want == 2 else f"{row[1]} {row[2]}"
            samples.append((label, tokenize(normalize(text), source_id=f"{path}:{i}")))
    if malformed:
        log.warning("%s: skipped %d malformed row(s)", path, malformed)
    return LoadResult(samples, malformed)


def load_dataset(spec: DatasetSpec) -> tuple[LoadResult, LoadResult]:
    return load_split(spec.train_path, spec), load_split(spec.test_path, spec)


def make_two_class_split(
    pos_path: str | Path,
    neg_path: str | Path,
    out_dir: str | Path,
    name: str = "mr",
    train_count: int = 10235,
    test_count: int = 427,
    seed: int = 0,
) -> DatasetSpec:
    """Build a seeded train/test split from raw one-sentence-per-line files.

    Reads positive and negative review files (labels 2 and 1 respectively),
    shuffles them with a seeded permutation, and writes
    <name>.{train,test}.csv plus <name>.split.idx recording which source
    line went where, so the split is shippable and reproducible.
    """
    entries: list[tuple[int, str, str]] = []
    for label, p in ((2, pos_path), (1, neg_path)):
        try:
            lines = Path(p).read_text(encoding="utf-8", errors="replace").splitlines()
        except OSError as exc:
            raise DataError(f"cannot read {p}: {exc}") from exc
        tag = "pos" if label == 2 else "neg"
        entries.extend((label, f"{tag}:{j}", ln) for j, ln in enumerate(lines) if ln.strip())
    if len(entries) != train_count + test_count:
        raise DataError(
            f"expected {train_count + test_count} usable lines, found {len(entries)}"
        )
    order = np.random.default_rng(seed).permutation(len(entries))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    splits = {"train": order[:train_count], "test": order[train_count:]}
    with open(out / f"{name}.split.idx", "w", encoding="utf-8") as idx_f:
        idx_f.write(f"# seed={seed} train={train_count} test={test_count}\n")
        for split, chosen in splits.items():
            with open(out / f"{name}.{split}.csv", "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f)
                for k in chosen:
                    label, source, line = entries[k]
                    writer.writerow([label, line])
                    idx_f.write(f"{split}\t{source}\n")
    return builtin_spec("mr", out) if name == "mr" else DatasetSpec(
        name=name,
        train_path=str(out / f"{name}.train.csv"),
        test_path=str(out / f"{name}.test.csv"),
        classes=2,
        n=51,
        m=18,
    )

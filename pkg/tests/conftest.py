import csv

import numpy as np
import pytest

from sent2matrix import synth
from sent2matrix.data import DatasetSpec


@pytest.fixture(scope="session")
def mr_synth(tmp_path_factory):
    """Review-shaped 2-class corpus with the reference 10235/427 split sizes."""
    d = tmp_path_factory.mktemp("mr_synth")
    return synth.generate_sentiment_corpus(d, seed=11)


@pytest.fixture(scope="session")
def ag_synth(tmp_path_factory):
    """News-shaped 4-class corpus; 30k training rows, full 7600-row test set."""
    d = tmp_path_factory.mktemp("ag_synth")
    return synth.generate_topic_corpus(d, train_count=30000, test_count=7600, seed=13)


def _toy_row(rng, label):
    lex = {1: ["bad", "awful", "dull", "gray"], 2: ["good", "super", "fine", "glad"]}
    filler = ["the", "it", "was", "a", "very", "and", "to", "see"]
    length = int(rng.integers(3, 8))
    words = []
    for _ in range(length):
        if rng.random() < 0.5:
            words.append(lex[label][rng.integers(0, 4)])
        else:
            words.append(filler[rng.integers(0, 8)])
    return " ".join(words)


@pytest.fixture(scope="session")
def toy_dataset(tmp_path_factory):
    """Tiny 2-class set with short sentences for fast harness/CLI tests."""
    d = tmp_path_factory.mktemp("toy")
    rng = np.random.default_rng(3)
    for split, count in (("train", 160), ("test", 48)):
        with open(d / f"toy.{split}.csv", "w", newline="") as f:
            w = csv.writer(f)
            for _ in range(count):
                label = int(rng.integers(1, 3))
                w.writerow([label, _toy_row(rng, label)])
    return DatasetSpec(
        name="toy",
        train_path=str(d / "toy.train.csv"),
        test_path=str(d / "toy.test.csv"),
        classes=2,
        n=20,
        m=6,
        format="csv2",
    )


@pytest.fixture()
def toy_config():
    from sent2matrix.models import ModelConfig

    return ModelConfig(
        arch="sent2matrix_dense",
        n=20,
        m=6,
        padding="serpentine",
        initial_filters=4,
        blocks=1,
        layers_per_block=2,
        growth=2,
        kernel=(3, 2),
        fc_hidden=8,
        classes=2,
        dropout_keep=0.5,
        seed=0,
    )

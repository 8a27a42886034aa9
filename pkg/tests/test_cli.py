import io

import numpy as np
import pytest

from sent2matrix.cli import main
from sent2matrix.encode import encode_batch, read_tensor_dump
from sent2matrix.text import normalize, tokenize


def _experiment_ini(tmp_path, toy_dataset, out_dir, epochs=2, seed=3):
    text = f"""
[data]
name = toy
train_path = {toy_dataset.train_path}
test_path = {toy_dataset.test_path}
classes = 2
n = 20
m = 6
format = csv2

[model]
arch = sent2matrix_dense
initial_filters = 4
blocks = 1
layers_per_block = 2
growth = 2
kernel = 3,2
fc_hidden = 8
seed = {seed}

[train]
epochs = {epochs}
batch_size = 32
out = {out_dir}
"""
    path = tmp_path / "exp.ini"
    path.write_text(text)
    return path


class TestFoldVisualize:
    def test_serpentine_grid(self, capsys):
        assert main(["fold-visualize", "--text", "the cat sat", "--m", "3"]) == 0
        out = capsys.readouterr().out
        assert out == "the\ntac\ncat\ntas\n"

    def test_zero_grid_marks_padding(self, capsys):
        assert main(["fold-visualize", "--text", "cat", "--m", "7", "--strategy", "zero"]) == 0
        assert capsys.readouterr().out == "..cat..\n"

    def test_cyclic_grid(self, capsys):
        assert main(["fold-visualize", "--text", "cat", "--m", "7", "--strategy", "cyclic"]) == 0
        assert capsys.readouterr().out == "catcatc\n"

    def test_no_words_is_data_error(self):
        assert main(["fold-visualize", "--text", "123 !!!"]) == 2

    def test_normalizes_input(self, capsys):
        assert main(["fold-visualize", "--text", "The CAT!", "--m", "3"]) == 0
        assert capsys.readouterr().out == "the\ntac\n"


class TestEncode:
    def test_text_dump_round_trip(self, tmp_path, capsys):
        out = tmp_path / "batch.bin"
        status = main(
            ["encode", "--text", "the cat sat", "--m", "4", "--strategy", "serpentine",
             "--out", str(out)]
        )
        assert status == 0
        with open(out, "rb") as f:
            got = read_tensor_dump(f)
        expect = encode_batch([tokenize(normalize("the cat sat"))], 3, 4, "serpentine")
        assert np.array_equal(got, expect)

    def test_dataset_encode(self, tmp_path, toy_dataset, capsys):
        ini = _experiment_ini(tmp_path, toy_dataset, tmp_path / "runs")
        out = tmp_path / "train.bin"
        status = main(["encode", "--config", str(ini), "--subsample", "5", "--out", str(out)])
        assert status == 0
        with open(out, "rb") as f:
            got = read_tensor_dump(f)
        assert got.shape[0] == 5
        assert got.shape[1:] == (2 * (20 - 1), 6, 26)

    def test_needs_exactly_one_source(self, tmp_path):
        assert main(["encode", "--out", str(tmp_path / "x.bin")]) == 1


class TestExitCodes:
    def test_missing_config_is_usage_error(self, tmp_path):
        assert main(["train", "--config", str(tmp_path / "missing.ini")]) == 1

    def test_unknown_flag(self):
        assert main(["gradcheck", "--bogus"]) == 1

    def test_unknown_subcommand(self):
        assert main(["frobnicate"]) == 1

    def test_no_subcommand(self):
        assert main([]) == 1

    def test_bad_label_file_is_data_error(self, tmp_path, toy_dataset):
        bad = tmp_path / "bad.csv"
        bad.write_text('9,"text"\n')
        ini = tmp_path / "exp.ini"
        ini.write_text(
            f"""
[data]
train_path = {bad}
test_path = {bad}
classes = 2
n = 20
m = 6

[model]
arch = sent2matrix_dense
initial_filters = 4
blocks = 1
layers_per_block = 1
growth = 2
fc_hidden = 8

[train]
epochs = 1
"""
        )
        assert main(["train", "--config", str(ini)]) == 2


class TestTrainEvalRoundTrip:
    def test_train_then_eval_reproduces_accuracy(self, tmp_path, toy_dataset, capsys):
        runs = tmp_path / "runs"
        ini = _experiment_ini(tmp_path, toy_dataset, runs)
        assert main(["train", "--config", str(ini)]) == 0
        train_out = capsys.readouterr().out
        final_line = [l for l in train_out.splitlines() if l.startswith("final ")][0]
        assert main(["eval", "--config", str(ini)]) == 0
        eval_out = capsys.readouterr().out.strip()
        # eval recomputes exactly the accuracy the report recorded
        train_acc = final_line.split("test_acc=")[1].split()[0]
        assert f"test_acc={train_acc}" in eval_out
        run_dirs = list(runs.iterdir())
        assert len(run_dirs) == 1
        assert (run_dirs[0] / "predictions_eval.csv").exists()

    def test_eval_without_checkpoint_is_data_error(self, tmp_path, toy_dataset):
        ini = _experiment_ini(tmp_path, toy_dataset, tmp_path / "never_trained")
        assert main(["eval", "--config", str(ini)]) == 2

    def test_seed_flag_changes_run_dir(self, tmp_path, toy_dataset):
        runs = tmp_path / "runs"
        ini = _experiment_ini(tmp_path, toy_dataset, runs)
        assert main(["train", "--config", str(ini), "--seed", "5"]) == 0
        assert any(d.name.endswith("_s5") for d in runs.iterdir())


class TestGradcheckCommand:
    def test_passes_and_prints_families(self, capsys):
        assert main(["gradcheck", "--seed", "7"]) == 0
        out = capsys.readouterr().out
        for family in ("linear", "conv2d_stride2", "dense_block", "softmax_xent"):
            assert family in out
        assert "FAIL" not in out


class TestComparePaddings:
    def test_toy_comparison(self, tmp_path, toy_dataset, capsys):
        ini = _experiment_ini(tmp_path, toy_dataset, tmp_path / "runs")
        status = main(
            ["compare-paddings", "--config", str(ini), "--seeds", "0", "--epochs", "1"]
        )
        assert status == 0
        out = capsys.readouterr().out
        assert "zero" in out and "cyclic" in out and "serpentine" in out
        assert (tmp_path / "runs" / "padding_comparison.txt").exists()

    def test_bad_seeds_usage_error(self, tmp_path, toy_dataset):
        ini = _experiment_ini(tmp_path, toy_dataset, tmp_path / "runs")
        assert main(["compare-paddings", "--config", str(ini), "--seeds", "a,b"]) == 1

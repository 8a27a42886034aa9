import numpy as np
import pytest

from sent2matrix.encode import slice_count
from sent2matrix.models import (
    CharCnn,
    ConfigError,
    ModelConfig,
    Sent2MatrixDense,
    WordCnn,
    build_char_cnn,
    build_sent2matrix,
    build_word_cnn,
    predict,
)


def _dense_config(**overrides):
    base = dict(
        arch="sent2matrix_dense",
        n=5,
        m=6,
        padding="serpentine",
        initial_filters=4,
        blocks=2,
        layers_per_block=2,
        growth=3,
        kernel=(3, 2),
        fc_hidden=8,
        classes=3,
        dropout_keep=1.0,
        seed=1,
    )
    base.update(overrides)
    return ModelConfig(**base)


class TestModelConfig:
    def test_round_trip(self):
        cfg = _dense_config()
        again = ModelConfig.from_text(cfg.to_text())
        assert again == cfg
        assert again.digest() == cfg.digest()

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            ModelConfig.from_text("arch = sent2matrix_dense\nwidgets = 7\n")

    def test_bad_values_rejected(self):
        with pytest.raises(ConfigError):
            ModelConfig.from_text("classes = 1\n")
        with pytest.raises(ConfigError):
            ModelConfig.from_text("dropout_keep = 0\n")
        with pytest.raises(ConfigError):
            ModelConfig.from_text("kernel = 3\n")
        with pytest.raises(ConfigError):
            ModelConfig.from_text("arch = rnn\n")

    def test_comments_and_blanks_ignored(self):
        cfg = ModelConfig.from_text("# comment\n\narch = char_cnn\nclasses = 2\n")
        assert cfg.arch == "char_cnn"
        assert cfg.classes == 2

    def test_digest_differs_by_field(self):
        assert _dense_config(seed=1).digest() != _dense_config(seed=2).digest()


class TestSent2MatrixDense:
    def test_first_conv_word_width(self):
        # n=3 serpentine gives 2(3-1)=4 slices; k2=2 at stride 2 gives width 2
        cfg = _dense_config(n=3, m=4, blocks=1, layers_per_block=1, initial_filters=8)
        model = Sent2MatrixDense(cfg)
        assert model.in_w == 4
        x = np.zeros((1, model.in_channels, model.in_h, model.in_w))
        logits = model.forward(x)
        assert logits.data.shape == (1, 3)
        assert (model.in_w - 2) // 2 + 1 == 2

    def test_dense_block_channel_law(self):
        cfg = ModelConfig(
            n=49, m=18, padding="serpentine", initial_filters=64,
            blocks=2, layers_per_block=3, growth=32, kernel=(3, 2),
            fc_hidden=256, classes=4, seed=0,
        )
        model = build_sent2matrix(cfg)
        # channels entering block 2 = initial + layers_per_block * growth
        assert model.params["block2.conv1.w"].shape == (32, 64 + 3 * 32, 3, 2)
        assert model.out_channels == 64 + 2 * 3 * 32

    def test_parameter_count_golden(self):
        cfg = ModelConfig(
            n=49, m=18, padding="serpentine", initial_filters=64,
            blocks=2, layers_per_block=3, growth=32, kernel=(3, 2),
            fc_hidden=256, classes=4, seed=0,
        )
        model = build_sent2matrix(cfg)
        # independent recount: stem + six block convs + two linear layers
        expect = 0
        expect += 64 * 26 * 3 * 2 + 64
        ch = 64
        h, w = 18 - 3 + 1, (slice_count(49, "serpentine") - 2) // 2 + 1
        for b in range(2):
            if b > 0:
                h, w = h // 2, w // 2
            for _ in range(3):
                expect += 32 * ch * 3 * 2 + 32
                ch += 32
        expect += 256 * (ch * h * w) + 256
        expect += 4 * 256 + 4
        assert model.param_count() == expect == 12_760_324

    def test_forward_smoke_finite(self):
        cfg = _dense_config()
        model = Sent2MatrixDense(cfg)
        x = np.zeros((2, model.in_channels, model.in_h, model.in_w))
        logits = model.forward(x)
        assert np.isfinite(logits.data).all()

    def test_position_channels_widen_input(self):
        cfg = _dense_config(use_position=True)
        model = Sent2MatrixDense(cfg)
        assert model.in_channels == 26 + cfg.m

    def test_pool_divisibility_guard(self):
        # zero padding on n=51 leaves a 25-wide map that 2x2 pooling rejects
        cfg = ModelConfig(
            n=51, m=18, padding="zero", initial_filters=8, blocks=2,
            layers_per_block=1, growth=4, kernel=(3, 2), fc_hidden=16,
            classes=2, seed=0,
        )
        with pytest.raises(ConfigError):
            Sent2MatrixDense(cfg)

    def test_kernel_larger_than_input_rejected(self):
        with pytest.raises(ConfigError):
            Sent2MatrixDense(_dense_config(m=2))

    def test_wrong_arch_rejected(self):
        with pytest.raises(ConfigError):
            build_sent2matrix(_dense_config(arch="word_cnn", n=8))


class TestWordCnn:
    def test_feature_length_arithmetic(self):
        # kernel 3 over 49 positions leaves 47 features before pooling
        assert 49 - 3 + 1 == 47
        cfg = ModelConfig(arch="word_cnn", n=49, m=18, classes=4, embed_dim=16, seed=0)
        model = build_word_cnn(cfg, vocab_size=50)
        idx = np.full((2, 49), -1, dtype=np.int64)
        idx[:, :3] = 1
        logits = model.forward(idx)
        assert logits.data.shape == (2, 4)

    def test_one_word_sentence_valid(self):
        cfg = ModelConfig(arch="word_cnn", n=5, m=18, classes=2, embed_dim=8, seed=0)
        model = WordCnn(cfg, vocab_size=10)
        idx = np.full((1, 5), -1, dtype=np.int64)
        idx[0, 0] = 3
        assert np.isfinite(model.forward(idx).data).all()

    def test_padding_columns_are_zero_embeddings(self):
        cfg = ModelConfig(arch="word_cnn", n=6, m=18, classes=2, embed_dim=4, seed=0)
        model = WordCnn(cfg, vocab_size=9)
        idx = np.array([[2, 5, -1, -1, -1, -1]])
        from sent2matrix import nn

        e = nn.embedding(None, model.params["embed.w"], np.maximum(idx, 0))
        masked = nn.elementwise_scale(None, e, (idx >= 0)[:, None, :].astype(float))
        assert np.abs(masked.data[0, :, 2:]).sum() == 0
        assert np.abs(masked.data[0, :, :2]).sum() > 0

    def test_capacity_below_kernel_rejected(self):
        cfg = ModelConfig(arch="word_cnn", n=4, m=18, classes=2, seed=0)
        with pytest.raises(ConfigError):
            WordCnn(cfg, vocab_size=10)


class TestCharCnn:
    def test_input_length(self):
        cfg = ModelConfig(arch="char_cnn", n=49, m=18, classes=4, initial_filters=8, fc_hidden=16, seed=0)
        model = build_char_cnn(cfg)
        assert model.in_length == 49 * 19 == 931
        assert 931 - 7 + 1 == 925

    def test_forward_smoke(self):
        cfg = ModelConfig(arch="char_cnn", n=20, m=6, classes=3, initial_filters=4, fc_hidden=8, seed=0)
        model = build_char_cnn(cfg)
        x = np.zeros((2, 27, model.in_length))
        logits = model.forward(x)
        assert logits.data.shape == (2, 3)
        assert np.isfinite(logits.data).all()

    def test_too_short_rejected(self):
        cfg = ModelConfig(arch="char_cnn", n=1, m=2, classes=2, seed=0)
        with pytest.raises(ConfigError):
            CharCnn(cfg)


class TestPredict:
    def _stub(self, logits):
        class Stub:
            def forward(self, x, tape=None, training=False, rng=None):
                from sent2matrix.nn import Tensor

                return Tensor(logits)

        return Stub()

    def test_argmax(self):
        assert predict(self._stub(np.array([[0.1, 0.9]])), None).tolist() == [1]

    def test_tie_goes_low(self):
        assert predict(self._stub(np.array([[0.5, 0.5]])), None).tolist() == [0]

    def test_batch_independent(self):
        out = predict(self._stub(np.array([[0.5, 0.1], [0.0, 2.0]])), None)
        assert out.tolist() == [0, 1]

    def test_rescaling_invariance(self):
        logits = np.array([[0.2, 0.7, 0.1], [3.0, 1.0, 2.0]])
        a = predict(self._stub(logits), None)
        b = predict(self._stub(logits * 7.5), None)
        assert np.array_equal(a, b)


class TestDeterministicInit:
    def test_same_seed_same_weights(self):
        m1 = Sent2MatrixDense(_dense_config(seed=5))
        m2 = Sent2MatrixDense(_dense_config(seed=5))
        for k in m1.params:
            assert np.array_equal(m1.params[k].data, m2.params[k].data)

    def test_different_seed_different_weights(self):
        m1 = Sent2MatrixDense(_dense_config(seed=5))
        m2 = Sent2MatrixDense(_dense_config(seed=6))
        assert not np.array_equal(m1.params["stem.w"].data, m2.params["stem.w"].data)

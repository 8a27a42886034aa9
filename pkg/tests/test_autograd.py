import numpy as np

from sent2matrix import checks
from sent2matrix import nn
from sent2matrix.nn import Parameter, Tape


class TestLayerFamilies:
    """Finite-difference agreement per layer family (h = 1e-6, float64)."""

    def test_linear_tight(self):
        assert checks.check_linear(0) < 1e-6

    def test_conv1d(self):
        assert checks.check_conv1d(1) < 1e-4
        assert checks.check_conv1d(2, stride=2) < 1e-4

    def test_conv2d(self):
        assert checks.check_conv2d(3) < 1e-4

    def test_conv2d_stride2(self):
        assert checks.check_conv2d(4, stride_h=1, stride_w=2) < 1e-5

    def test_pools(self):
        assert checks.check_avg_pool2d(5) < 1e-4
        assert checks.check_max_pool1d(6) < 1e-4
        assert checks.check_global_max_pool1d(7) < 1e-4

    def test_concat_pad(self):
        assert checks.check_concat_pad(8) < 1e-4

    def test_dropout(self):
        assert checks.check_dropout(9) < 1e-4

    def test_embedding(self):
        assert checks.check_embedding(10) < 1e-4

    def test_softmax_xent(self):
        assert checks.check_softmax_xent(11) < 1e-6

    def test_full_mini_dense_block(self):
        assert checks.check_dense_block(12) < 1e-4


class TestAccumulation:
    def test_shared_input_gets_summed_adjoints(self):
        # logits built from two uses of x must match the single-use graph
        # computing the same function, gradient included
        w = np.eye(2)
        b = np.zeros(2)
        labels = np.array([0])

        x_a = Parameter(np.array([[2.0, 3.0]]))
        tape = Tape()
        y1 = nn.linear(tape, x_a, Parameter(w), Parameter(b))
        y2 = nn.linear(tape, x_a, Parameter(w), Parameter(b))
        both = nn.concat_channels(tape, y1, y2)
        # picks y1_j + y2_j, i.e. 2 * x_j
        head = Parameter(np.array([[1.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0, 1.0]]))
        loss_a = nn.softmax_xent(tape, nn.linear(tape, both, head, Parameter(b)), labels)
        nn.backward(tape, loss_a)

        x_b = Parameter(np.array([[2.0, 3.0]]))
        tape = Tape()
        doubled = nn.linear(tape, x_b, Parameter(2.0 * w), Parameter(b))
        loss_b = nn.softmax_xent(tape, doubled, labels)
        nn.backward(tape, loss_b)

        assert float(loss_a.data) == float(loss_b.data)
        assert np.allclose(x_a.grad, x_b.grad, atol=1e-15)

    def test_untouched_branch_skipped(self):
        x = Parameter(np.ones((1, 3)))
        tape = Tape()
        nn.relu(tape, x)  # dead branch, never reaches the loss
        loss = nn.softmax_xent(
            tape, nn.linear(tape, x, Parameter(np.ones((2, 3))), Parameter(np.zeros(2))), np.array([1])
        )
        nn.backward(tape, loss)
        assert x.grad is not None


class TestDeterminism:
    def test_repeated_backward_is_bit_identical(self):
        def run():
            rng = np.random.default_rng(123)
            x = Parameter(rng.standard_normal((4, 3, 8, 9)))
            w = Parameter(rng.standard_normal((5, 3, 3, 2)))
            b = Parameter(np.zeros(5))
            hw = Parameter(rng.standard_normal((2, 5 * 6 * 4)))
            hb = Parameter(np.zeros(2))
            tape = Tape()
            t = nn.relu(tape, nn.conv2d(tape, x, w, b, 1, 2))
            loss = nn.softmax_xent(
                tape, nn.linear(tape, nn.flatten(tape, t), hw, hb), np.array([0, 1, 1, 0])
            )
            nn.backward(tape, loss)
            return w.grad.copy(), x.grad.copy()

        w1, x1 = run()
        w2, x2 = run()
        assert np.array_equal(w1, w2)
        assert np.array_equal(x1, x2)

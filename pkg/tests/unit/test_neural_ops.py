"""Unit tests for the differentiable building blocks."""

import numpy as np
import pytest

from surit.errors import ShapeError
from surit.neural import ops
from surit.oracle import compare_gradients, finite_diff
from surit.verification import _ops_cases, op_gradients


@pytest.mark.unit
class TestForward:
    """Test forward values."""

    def test_linear_identity(self, rng):
        x = rng.normal(size=(4, 3))
        y, _ = ops.linear_forward(x, np.eye(3), np.zeros(3))
        np.testing.assert_array_equal(y, x)

    def test_softmax_of_zeros(self):
        y, _ = ops.softmax_forward(np.zeros(4))
        np.testing.assert_allclose(y, 0.25)

    def test_sigmoid_is_stable(self):
        y = ops.sigmoid(np.array([-800.0, 0.0, 800.0]))
        np.testing.assert_allclose(y, [0.0, 0.5, 1.0])
        assert np.all(np.isfinite(y))

    def test_conv1d_is_causal(self, rng):
        x = rng.normal(size=(6, 2))
        W = rng.normal(size=(3, 2, 4))
        b = rng.normal(size=4)
        y, _ = ops.conv1d_forward(x, W, b)
        changed = x.copy()
        changed[4:] += 10.0
        y2, _ = ops.conv1d_forward(changed, W, b)
        np.testing.assert_array_equal(y[:4], y2[:4])
        assert not np.allclose(y[4:], y2[4:])

    def test_conv1d_first_frame(self, rng):
        x = rng.normal(size=(3, 2))
        W = rng.normal(size=(2, 2, 1))
        y, _ = ops.conv1d_forward(x, W, np.zeros(1))
        np.testing.assert_allclose(y[0], x[0] @ W[1])
        np.testing.assert_allclose(y[1], x[0] @ W[0] + x[1] @ W[1])

    def test_time_reduction_pairs_frames(self):
        x = np.arange(10.0).reshape(5, 2)
        W = np.eye(4)
        y, _ = ops.time_reduction_forward(x, W, np.zeros(4))
        np.testing.assert_array_equal(y, [[0, 1, 2, 3], [4, 5, 6, 7], [8, 9, 0, 0]])

    def test_embedding_lookup(self, rng):
        E = rng.normal(size=(4, 3))
        y, _ = ops.embed_forward(np.array([2, 0, 2]), E)
        np.testing.assert_array_equal(y, E[[2, 0, 2]])

    def test_embedding_out_of_range(self):
        with pytest.raises(ShapeError):
            ops.embed_forward(np.array([4]), np.zeros((4, 2)))

    def test_linear_shape_mismatch(self):
        with pytest.raises(ShapeError):
            ops.linear_forward(np.zeros((2, 3)), np.zeros((4, 2)), np.zeros(2))

    def test_recurrent_matches_stepwise(self, rng):
        X = rng.normal(size=(5, 3))
        W, U, b = rng.normal(size=(3, 6)), rng.normal(size=(2, 6)), rng.normal(size=6)
        hs, _ = ops.recurrent_forward(X, np.zeros(2), W, U, b)
        h = np.zeros(2)
        for t in range(5):
            h, _ = ops.recurrent_step_forward(X[t], h, W, U, b)
            np.testing.assert_allclose(hs[t], h, rtol=1e-14)

    def test_recurrent_update_gate_keeps_state(self):
        # a saturated update gate copies the previous state through
        H = 2
        b = np.zeros(3 * H)
        b[H : 2 * H] = 50.0
        h0 = np.array([0.3, -0.7])
        h, _ = ops.recurrent_step_forward(np.ones(1), h0, np.ones((1, 3 * H)), np.zeros((H, 3 * H)), b)
        np.testing.assert_allclose(h, h0, atol=1e-12)


@pytest.mark.unit
class TestBackward:
    """Test every backward pass against central differences."""

    @pytest.mark.parametrize("index", range(8))
    def test_op_gradients(self, index):
        rng = np.random.default_rng(index)
        name, forward, inputs = _ops_cases(rng)[index]
        out, _ = forward(inputs)
        probe = rng.normal(size=out.shape)
        analytic = op_gradients(name, forward, inputs, probe)
        numeric = finite_diff(lambda p: float(np.sum(forward(p)[0] * probe)), inputs)
        check = compare_gradients(analytic, numeric, rtol=1e-5, atol=1e-8)
        assert check.passed, (name, check)

    def test_embedding_backward_accumulates(self):
        _, cache = ops.embed_forward(np.array([1, 1, 0]), np.zeros((3, 2)))
        dE = ops.embed_backward(np.ones((3, 2)), cache)
        np.testing.assert_array_equal(dE, [[1, 1], [2, 2], [0, 0]])

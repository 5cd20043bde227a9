"""Engine tests: layer math against naive oracles, losses, optimizers,
gradient checks, RNG determinism, and model-file round trips."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from myogate import nn
from myogate.errors import ArgumentError, ConfigurationError, StateError
from myogate.nn.network import Network


def naive_conv2d(x, kernels, bias):
    """Six-nested-loop cross-correlation with zero padding 1."""
    c, h, w = x.shape
    k = kernels.shape[0]
    padded = np.zeros((c, h + 2, w + 2), dtype=np.float64)
    padded[:, 1:h + 1, 1:w + 1] = x
    out = np.zeros((k, h, w), dtype=np.float64)
    for ko in range(k):
        for i in range(h):
            for j in range(w):
                acc = 0.0
                for ci in range(c):
                    for di in range(3):
                        for dj in range(3):
                            acc += padded[ci, i + di, j + dj] * kernels[ko, ci, di, dj]
                out[ko, i, j] = acc + bias[ko]
    return out


class TestConv2d:
    def test_ones_overlap_counting(self):
        x = np.ones((1, 3, 3), np.float32)
        k = np.ones((1, 1, 3, 3), np.float32)
        out = nn.conv2d_forward(x, k, np.zeros(1, np.float32))
        expected = np.array([[4, 6, 4], [6, 9, 6], [4, 6, 4]], np.float32)
        np.testing.assert_array_equal(out[0], expected)

    def test_zero_kernels_zero_output(self):
        x = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
        out = nn.conv2d_forward(x, np.zeros((3, 2, 3, 3), np.float32), np.zeros(3, np.float32))
        assert out.shape == (3, 3, 4)
        np.testing.assert_array_equal(out, np.zeros_like(out))

    def test_matches_naive_loop_oracle(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal((2, 5, 4)).astype(np.float32)
        k = rng.standard_normal((3, 2, 3, 3)).astype(np.float32)
        b = rng.standard_normal(3).astype(np.float32)
        out = nn.conv2d_forward(x, k, b)
        expected = naive_conv2d(x, k, b)
        assert np.abs(out - expected).max() < 1e-6

    def test_shape_mismatch_names_both_shapes(self):
        with pytest.raises(ConfigurationError, match=r"\(3, 2, 3, 3\).*\(1, 5, 4\)"):
            nn.conv2d_forward(np.zeros((1, 5, 4), np.float32),
                              np.zeros((3, 2, 3, 3), np.float32), np.zeros(3, np.float32))

    @given(h=st.integers(1, 6), w=st.integers(1, 6), c=st.integers(1, 3), k=st.integers(1, 4))
    @settings(max_examples=25, deadline=None)
    def test_shape_preserved_for_any_spatial_size(self, h, w, c, k):
        rng = np.random.default_rng(h * 1000 + w * 100 + c * 10 + k)
        x = rng.standard_normal((c, h, w)).astype(np.float32)
        kern = rng.standard_normal((k, c, 3, 3)).astype(np.float32)
        out = nn.conv2d_forward(x, kern, np.zeros(k, np.float32))
        assert out.shape == (k, h, w)


class TestDense:
    def test_identity_weights(self):
        x = np.array([1.5, -2.0, 3.0], np.float32)
        out = nn.dense_forward(x, np.eye(3, dtype=np.float32), np.zeros(3, np.float32))
        np.testing.assert_array_equal(out, x)

    def test_zero_input_gives_bias(self):
        b = np.array([0.5, -1.0], np.float32)
        out = nn.dense_forward(np.zeros(4, np.float32), np.zeros((2, 4), np.float32), b)
        np.testing.assert_array_equal(out, b)

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal(4).astype(np.float32)
        w = rng.standard_normal((3, 4)).astype(np.float32)
        b = rng.standard_normal(3).astype(np.float32)
        expected = np.array([sum(w[i, j] * x[j] for j in range(4)) + b[i] for i in range(3)])
        assert np.abs(nn.dense_forward(x, w, b) - expected).max() < 1e-6

    def test_length_mismatch(self):
        with pytest.raises(ConfigurationError):
            nn.dense_forward(np.zeros(5, np.float32), np.zeros((3, 4), np.float32), np.zeros(3, np.float32))


class TestSoftmax:
    def test_uniform_on_equal_logits(self):
        np.testing.assert_allclose(nn.softmax(np.zeros(2, np.float32)), [0.5, 0.5])

    def test_no_overflow_on_huge_logits(self):
        out = nn.softmax(np.array([1000.0, 0.0], np.float32))
        assert np.isfinite(out).all()
        assert out[0] > 0.999999 and out[1] < 1e-6

    def test_against_float64_reference(self):
        # frozen from a 64-bit evaluation of exp([1,2,3]) / sum
        expected = [0.09003057317038046, 0.24472847105479767, 0.6652409557748219]
        out = nn.softmax(np.array([1.0, 2.0, 3.0], np.float32))
        np.testing.assert_allclose(out, expected, atol=1e-6)

    @given(st.lists(st.floats(-100, 100), min_size=1, max_size=8))
    @settings(max_examples=50, deadline=None)
    def test_simplex_invariant(self, logits):
        out = nn.softmax(np.array(logits, np.float32))
        assert abs(out.sum() - 1.0) < 1e-6
        assert (out > 0).all()


class TestLosses:
    def test_bce_half(self):
        assert nn.bce_loss(0.5, 1) == pytest.approx(math.log(2), abs=1e-6)

    def test_bce_near_perfect(self):
        assert nn.bce_loss(1 - 1e-7, 1) == pytest.approx(0.0, abs=1e-6)

    def test_bce_confident_wrong(self):
        assert nn.bce_loss(0.9, 0) == pytest.approx(2.302585, abs=1e-6)

    def test_bce_rejects_bad_target(self):
        with pytest.raises(ArgumentError):
            nn.bce_loss(0.5, 2)

    def test_cross_entropy_uniform(self):
        probs = np.full(6, 1 / 6)
        assert nn.cross_entropy_loss(probs, 3) == pytest.approx(math.log(6), abs=1e-6)

    def test_cross_entropy_one_hot(self):
        probs = np.array([0.0, 1.0, 0.0])
        assert nn.cross_entropy_loss(probs, 1) == pytest.approx(0.0, abs=1e-6)

    def test_cross_entropy_example(self):
        assert nn.cross_entropy_loss(np.array([0.7, 0.2, 0.1]), 1) == pytest.approx(1.609438, abs=1e-6)

    def test_cross_entropy_index_out_of_range(self):
        with pytest.raises(ArgumentError):
            nn.cross_entropy_loss(np.array([0.5, 0.5]), 2)


def small_dense_net(seed=0, dtype=np.float32):
    return Network.build(
        [{"kind": "dense", "in_features": 2, "out_features": 2}], seed, dtype
    )


class TestBackward:
    def test_hand_derived_dense_mse(self):
        # y = Wx + b, L = 0.5*||y - t||^2 per sample: dL/dW = (y-t) x^T, dL/db = y-t
        net = small_dense_net(dtype=np.float64)
        w = np.array([[1.0, 2.0], [3.0, 4.0]])
        b = np.array([0.5, -0.5])
        net.set_parameters([w, b])
        x = np.array([[1.0, -1.0]])
        t = np.array([[0.0, 0.0]])
        y = w @ x[0] + b  # [-0.5, -1.5]
        _, grads = net.loss_and_gradients(x, t, "mse")
        np.testing.assert_allclose(grads[0], np.outer(y - t[0], x[0]))
        np.testing.assert_allclose(grads[1], y - t[0])

    def test_zero_loss_gives_zero_gradients(self):
        net = small_dense_net(dtype=np.float64)
        net.set_parameters([np.eye(2), np.zeros(2)])
        x = np.array([[0.3, -0.7], [1.0, 2.0]])
        loss, grads = net.loss_and_gradients(x, x, "mse")
        assert loss == 0.0
        for g in grads:
            np.testing.assert_array_equal(g, np.zeros_like(g))

    def test_finite_difference_agreement_random_net(self):
        specs = [
            {"kind": "dense", "in_features": 3, "out_features": 5},
            {"kind": "leaky-relu", "slope": 0.2},
            {"kind": "dense", "in_features": 5, "out_features": 2},
            {"kind": "softmax"},
        ]
        net = Network.build(specs, seed=3, dtype=np.float64)
        rng = np.random.default_rng(5)
        x = rng.standard_normal((4, 3))
        t = rng.integers(0, 2, size=4)
        assert nn.gradient_check(net, x, t, loss="cross_entropy") < 1e-4

    def test_backward_before_forward_is_state_error(self):
        net = small_dense_net()
        with pytest.raises(StateError):
            net.backward(np.zeros((1, 2), np.float32))


class TestOptimizers:
    def test_sgd_single_step(self):
        w = np.array([1.0], np.float32)
        nn.Sgd(0.1).step([w], [np.array([2.0], np.float32)])
        assert w[0] == pytest.approx(0.8, abs=1e-7)

    def test_zero_gradient_no_change(self):
        for opt in (nn.Sgd(0.5), nn.Adam(0.5)):
            w = np.array([1.0, -2.0], np.float32)
            opt.step([w], [np.zeros(2, np.float32)])
            np.testing.assert_array_equal(w, [1.0, -2.0])

    def test_adam_first_step_identity(self):
        # m_hat/sqrt(v_hat) == 1 on the first step when g == 1 everywhere
        w = np.zeros(4, np.float64)
        nn.Adam(1e-3).step([w], [np.ones(4, np.float64)])
        np.testing.assert_allclose(w, -1e-3, atol=1e-9)

    def test_adam_step_counter(self):
        opt = nn.Adam(1e-3)
        w = [np.ones(2, np.float32)]
        for expected in (1, 2, 3):
            opt.step(w, [np.ones(2, np.float32)])
            assert opt.step_count == expected

    def test_shape_mismatch(self):
        with pytest.raises(ConfigurationError):
            nn.Sgd(0.1).step([np.zeros(2)], [np.zeros(3)])


class TestGradientCheck:
    def test_linear_network_is_exact(self):
        net = Network.build(
            [{"kind": "dense", "in_features": 3, "out_features": 2}], seed=1, dtype=np.float64
        )
        rng = np.random.default_rng(2)
        x = rng.standard_normal((5, 3))
        t = rng.standard_normal((5, 2))
        assert nn.gradient_check(net, x, t, loss="mse") < 1e-8

    def test_requires_float64(self):
        net = small_dense_net(dtype=np.float32)
        with pytest.raises(StateError):
            nn.gradient_check(net, np.zeros((1, 2), np.float32), np.zeros((1, 2)))

    @pytest.mark.parametrize("seed", range(20))
    def test_random_layer_stacks(self, seed):
        """Every layer kind appears across these 20 random configurations."""
        rng = np.random.default_rng(seed)
        if seed % 2:  # conv front end
            c = int(rng.integers(1, 3))
            h, w = int(rng.integers(2, 4)), int(rng.integers(2, 4))
            k = int(rng.integers(1, 3))
            specs = [
                {"kind": "conv2d", "in_channels": c, "out_channels": k},
                {"kind": rng.choice(["relu", "leaky-relu"])},
                {"kind": "flatten"},
                {"kind": "dense", "in_features": k * h * w, "out_features": 3},
                {"kind": "softmax"},
            ]
            x = rng.standard_normal((3, c, h, w))
        else:  # dense stack
            width = int(rng.integers(2, 6))
            specs = [
                {"kind": "dense", "in_features": 3, "out_features": width},
                {"kind": rng.choice(["relu", "leaky-relu", "sigmoid"])},
                {"kind": "dense", "in_features": width, "out_features": 3},
                {"kind": "softmax"},
            ]
            x = rng.standard_normal((3, 3))
        net = Network.build(specs, seed=seed, dtype=np.float64)
        t = rng.integers(0, 3, size=3)
        assert nn.gradient_check(net, x, t, loss="cross_entropy") < 1e-4

    def test_conv_stack(self):
        specs = [
            {"kind": "conv2d", "in_channels": 1, "out_channels": 2},
            {"kind": "leaky-relu", "slope": 0.2},
            {"kind": "conv2d", "in_channels": 2, "out_channels": 2},
            {"kind": "flatten"},
            {"kind": "dense", "in_features": 2 * 3 * 4, "out_features": 3},
            {"kind": "softmax"},
        ]
        net = Network.build(specs, seed=9, dtype=np.float64)
        rng = np.random.default_rng(9)
        x = rng.standard_normal((2, 1, 3, 4))
        t = rng.integers(0, 3, size=2)
        assert nn.gradient_check(net, x, t, loss="cross_entropy") < 1e-4


class TestSampleGaussian:
    def test_same_seed_identical(self):
        np.testing.assert_array_equal(nn.sample_gaussian(64, seed=5), nn.sample_gaussian(64, seed=5))

    def test_statistics_at_scale(self):
        draws = nn.sample_gaussian(100_000, seed=1234)
        assert abs(draws.mean()) < 0.02
        assert 0.97 < draws.var() < 1.03

    def test_streams_differ(self):
        a = nn.sample_gaussian(32, seed=5, stream=0)
        b = nn.sample_gaussian(32, seed=5, stream=1)
        assert not np.array_equal(a, b)


class TestSerialization:
    def build_net(self, seed=42):
        specs = [
            {"kind": "conv2d", "in_channels": 1, "out_channels": 4},
            {"kind": "leaky-relu", "slope": 0.2},
            {"kind": "flatten"},
            {"kind": "dense", "in_features": 4 * 2 * 3, "out_features": 3},
            {"kind": "softmax"},
        ]
        return Network.build(specs, seed=seed)

    def test_bit_exact_round_trip(self, tmp_path):
        net = self.build_net()
        nn.save_model(net, tmp_path / "m", meta={"note": "round trip"})
        loaded, meta = nn.load_model(tmp_path / "m")
        assert meta["note"] == "round trip"
        for a, b in zip(net.parameters(), loaded.parameters()):
            np.testing.assert_array_equal(a, b)

    def test_round_trip_preserves_forward(self, tmp_path):
        net = self.build_net(seed=7)
        nn.save_model(net, tmp_path / "m")
        loaded, _ = nn.load_model(tmp_path / "m")
        x = np.random.default_rng(0).standard_normal((5, 1, 2, 3)).astype(np.float32)
        np.testing.assert_array_equal(net.forward(x), loaded.forward(x))

    def test_checksum_detects_corruption(self, tmp_path):
        net = self.build_net()
        nn.save_model(net, tmp_path / "m")
        blob = (tmp_path / "m.weights").read_bytes()
        (tmp_path / "m.weights").write_bytes(bytes([blob[0] ^ 0xFF]) + blob[1:])
        with pytest.raises(ConfigurationError, match="checksum"):
            nn.load_model(tmp_path / "m")

    def test_identical_seed_identical_weights(self):
        a, b = self.build_net(123), self.build_net(123)
        for pa, pb in zip(a.parameters(), b.parameters()):
            np.testing.assert_array_equal(pa, pb)


class TestNetworkInvariants:
    def test_forward_outputs_finite(self):
        net = TestSerialization().build_net()
        x = np.random.default_rng(1).standard_normal((8, 1, 2, 3)).astype(np.float32) * 100
        out = net.forward(x)
        assert np.isfinite(out).all()

    def test_forward_is_pure(self):
        net = TestSerialization().build_net()
        x = np.random.default_rng(2).standard_normal((3, 1, 2, 3)).astype(np.float32)
        first = net.forward(x).copy()
        np.testing.assert_array_equal(net.forward(x), first)

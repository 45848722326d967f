import numpy as np
import pytest

from folioseg.nn.layers import BatchNorm2d, Concat, Conv2d, ConvTranspose2d, MaxPool2d, ReLU
from folioseg.nn.losses import CrossEntropyLoss, softmax
from folioseg.nn.optim import SGD, Adam

from oracles import numerical_gradient

RNG = np.random.default_rng(1234)


def check_layer_gradients(layer, x, tol=1e-7, training=True):
    """Analytic gradients (input and parameters) vs central differences."""
    dout = RNG.standard_normal(layer.forward(x, training).shape)

    def loss_fn():
        return float((layer.forward(x, training) * dout).sum())

    layer.forward(x, training)
    dx = layer.backward(dout)
    numeric_dx = numerical_gradient(loss_fn, x)
    assert np.allclose(dx, numeric_dx, atol=tol), "input gradient mismatch"
    for name, param in layer.params.items():
        numeric = numerical_gradient(loss_fn, param)
        layer.forward(x, training)
        layer.backward(dout)
        assert np.allclose(layer.grads[name], numeric, atol=tol), f"{name} gradient mismatch"


class TestConv2d:
    @pytest.mark.parametrize("kernel,stride,padding", [(3, 1, 1), (1, 1, 0), (3, 2, 1), (2, 2, 0)])
    def test_gradients(self, kernel, stride, padding):
        layer = Conv2d(3, 4, kernel, stride, padding, rng=np.random.default_rng(0), dtype=np.float64)
        x = RNG.standard_normal((2, 3, 6, 6))
        check_layer_gradients(layer, x)

    def test_output_shape_same_padding(self):
        layer = Conv2d(3, 8, rng=np.random.default_rng(0))
        out = layer.forward(np.zeros((2, 3, 16, 16), dtype=np.float32), training=False)
        assert out.shape == (2, 8, 16, 16)

    def test_known_value(self):
        # 1x1 kernel, identity-style weight: convolution is a channel mix.
        layer = Conv2d(2, 1, kernel_size=1, padding=0, rng=np.random.default_rng(0), dtype=np.float64)
        layer.params["w"][...] = np.array([[[[2.0]], [[3.0]]]])
        layer.params["b"][...] = np.array([0.5])
        x = np.ones((1, 2, 2, 2))
        out = layer.forward(x, training=False)
        assert np.allclose(out, 2.0 + 3.0 + 0.5)

    def test_channel_mismatch(self):
        layer = Conv2d(3, 4, rng=np.random.default_rng(0))
        with pytest.raises(ValueError, match="channels"):
            layer.forward(np.zeros((1, 2, 8, 8), dtype=np.float32), training=False)


class TestConvTranspose2d:
    def test_gradients(self):
        layer = ConvTranspose2d(4, 2, rng=np.random.default_rng(0), dtype=np.float64)
        x = RNG.standard_normal((2, 4, 3, 3))
        check_layer_gradients(layer, x)

    def test_upsamples_by_two(self):
        layer = ConvTranspose2d(4, 2, rng=np.random.default_rng(0))
        out = layer.forward(np.zeros((1, 4, 5, 7), dtype=np.float32), training=False)
        assert out.shape == (1, 2, 10, 14)

    def test_kernel_must_equal_stride(self):
        with pytest.raises(ValueError):
            ConvTranspose2d(4, 2, kernel_size=3, stride=2, rng=np.random.default_rng(0))


class TestBatchNorm2d:
    def test_gradients_training_mode(self):
        layer = BatchNorm2d(3, dtype=np.float64)
        layer.params["gamma"][...] = RNG.uniform(0.5, 1.5, 3)
        layer.params["beta"][...] = RNG.uniform(-0.5, 0.5, 3)
        x = RNG.standard_normal((4, 3, 5, 5))
        check_layer_gradients(layer, x, tol=1e-6)

    def test_normalizes_batch(self):
        layer = BatchNorm2d(2, dtype=np.float64)
        x = RNG.standard_normal((8, 2, 6, 6)) * 3.0 + 1.0
        out = layer.forward(x, training=True)
        assert np.allclose(out.mean(axis=(0, 2, 3)), 0.0, atol=1e-10)
        assert np.allclose(out.std(axis=(0, 2, 3)), 1.0, atol=1e-3)

    def test_running_stats_feed_eval(self):
        layer = BatchNorm2d(2, momentum=1.0, dtype=np.float64)
        x = RNG.standard_normal((8, 2, 4, 4)) * 2.0 + 3.0
        layer.forward(x, training=True)
        assert np.allclose(layer.buffers["running_mean"], x.mean(axis=(0, 2, 3)))
        out = layer.forward(x, training=False)
        assert np.allclose(out.mean(axis=(0, 2, 3)), 0.0, atol=1e-10)


class TestMaxPool2d:
    def test_gradients(self):
        layer = MaxPool2d()
        x = RNG.standard_normal((2, 3, 6, 6))
        check_layer_gradients(layer, x)

    def test_tie_routes_to_first(self):
        layer = MaxPool2d()
        x = np.ones((1, 1, 2, 2))
        layer.forward(x, training=True)
        dx = layer.backward(np.ones((1, 1, 1, 1)))
        assert dx.sum() == 1.0
        assert dx[0, 0, 0, 0] == 1.0

    def test_odd_inputs_rejected(self):
        with pytest.raises(ValueError, match="even"):
            MaxPool2d().forward(np.zeros((1, 1, 5, 6)), training=True)


class TestReLUAndConcat:
    def test_relu_gradient(self):
        layer = ReLU()
        x = RNG.standard_normal((2, 3, 4, 4))
        check_layer_gradients(layer, x)

    def test_concat_round_trip(self):
        layer = Concat()
        skip = RNG.standard_normal((2, 3, 4, 4))
        up = RNG.standard_normal((2, 5, 4, 4))
        merged = layer.forward_pair(skip, up)
        assert merged.shape == (2, 8, 4, 4)
        dskip, dup = layer.backward(merged)
        assert np.array_equal(dskip, skip)
        assert np.array_equal(dup, up)


class TestCrossEntropy:
    def test_hand_computed_value(self):
        import math

        logits = np.array([[1.0, 2.0, 0.5], [0.0, 0.0, 0.0]])
        targets = np.array([1, 2])
        loss = CrossEntropyLoss()
        value = loss(logits, targets)
        expected = -(
            math.log(math.exp(2.0) / sum(math.exp(v) for v in (1.0, 2.0, 0.5)))
            + math.log(1.0 / 3.0)
        ) / 2.0
        assert value == pytest.approx(expected, rel=1e-12)

    def test_near_one_hot_loss_is_near_zero(self):
        import math

        scale = 20.0
        classes = 8
        logits = np.eye(classes) * scale
        targets = np.arange(classes)
        loss = CrossEntropyLoss()
        expected = math.log(1.0 + (classes - 1) * math.exp(-scale))
        assert loss(logits, targets) == pytest.approx(expected, rel=1e-9)

    def test_gradient_matches_numeric(self):
        logits = RNG.standard_normal((6, 4))
        targets = RNG.integers(0, 4, size=6)
        loss = CrossEntropyLoss()

        def loss_fn():
            return loss(logits, targets)

        loss_fn()
        grad = loss.backward()
        numeric = numerical_gradient(loss_fn, logits)
        assert np.allclose(grad, numeric, atol=1e-8)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            CrossEntropyLoss()(np.zeros((2, 3, 4)), np.zeros(2, dtype=int))

    def test_softmax_sums_to_one(self):
        probs = softmax(RNG.standard_normal((3, 8, 4, 4)), axis=1)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)


def scalar_adam_oracle(grads, lr=0.01, beta1=0.9, beta2=0.999, eps=1e-8, p0=1.0):
    """Independent scalar Adam for comparison."""
    p, m, v = p0, 0.0, 0.0
    for t, g in enumerate(grads, start=1):
        m = beta1 * m + (1 - beta1) * g
        v = beta2 * v + (1 - beta2) * g * g
        m_hat = m / (1 - beta1**t)
        v_hat = v / (1 - beta2**t)
        p -= lr * m_hat / (v_hat**0.5 + eps)
    return p


class TestOptimizers:
    def test_adam_matches_scalar_oracle(self):
        param = np.array([1.0])
        optimizer = Adam(lr=0.01)
        grad_sequence = [0.5, -0.25, 0.8, 0.1]
        for g in grad_sequence:
            optimizer.step({"p": param}, {"p": np.array([g])})
        assert param[0] == pytest.approx(scalar_adam_oracle(grad_sequence), rel=1e-12)

    def test_adam_state_is_per_parameter(self):
        a, b = np.array([1.0]), np.array([1.0])
        optimizer = Adam(lr=0.1)
        optimizer.step({"a": a, "b": b}, {"a": np.array([1.0]), "b": np.array([-1.0])})
        assert a[0] < 1.0 < b[0]

    def test_sgd_step(self):
        param = np.array([2.0])
        SGD(lr=0.5).step({"p": param}, {"p": np.array([1.0])})
        assert param[0] == pytest.approx(1.5)

    def test_sgd_momentum_accumulates(self):
        param = np.array([0.0])
        optimizer = SGD(lr=1.0, momentum=0.5)
        optimizer.step({"p": param}, {"p": np.array([1.0])})
        optimizer.step({"p": param}, {"p": np.array([1.0])})
        assert param[0] == pytest.approx(-(1.0 + 1.5))

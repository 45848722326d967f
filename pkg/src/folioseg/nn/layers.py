"""Network layers with explicit forward and backward passes.

Every layer owns its arrays: ``params`` are trainable, ``buffers`` are
running state (batch-norm statistics), ``grads`` mirror ``params`` after a
backward pass. Forward passes cache what backward needs; a layer therefore
belongs to exactly one in-flight computation at a time.
"""

import numpy as np
from numpy.lib.stride_tricks import as_strided


def he_uniform(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int, dtype) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


class Layer:
    """Common container behavior; subclasses fill params/buffers."""

    def __init__(self):
        self.params: dict[str, np.ndarray] = {}
        self.grads: dict[str, np.ndarray] = {}
        self.buffers: dict[str, np.ndarray] = {}

    def forward(self, x: np.ndarray, training: bool) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dout: np.ndarray) -> np.ndarray:
        raise NotImplementedError


class Conv2d(Layer):
    """2D convolution via im2col and BLAS matmul."""

    def __init__(self, in_channels, out_channels, kernel_size=3, stride=1, padding=1,
                 *, rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        if kernel_size < 1 or stride < 1 or padding < 0:
            raise ValueError("invalid convolution hyperparameters")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.padding = padding
        fan_in = in_channels * kernel_size * kernel_size
        self.params = {
            "w": he_uniform(rng, (out_channels, in_channels, kernel_size, kernel_size), fan_in, dtype),
            "b": np.zeros(out_channels, dtype=dtype),
        }
        self._cache = None

    def _im2col(self, xp: np.ndarray, oh: int, ow: int) -> np.ndarray:
        n, c, _, _ = xp.shape
        k, s = self.kernel_size, self.stride
        sn, sc, sh, sw = xp.strides
        view = as_strided(
            xp,
            shape=(n, c, k, k, oh, ow),
            strides=(sn, sc, sh, sw, s * sh, s * sw),
            writeable=False,
        )
        return np.ascontiguousarray(view).reshape(n, c * k * k, oh * ow)

    def forward(self, x, training):
        k, s, p = self.kernel_size, self.stride, self.padding
        n, c, h, w = x.shape
        if c != self.in_channels:
            raise ValueError(f"expected {self.in_channels} input channels, got {c}")
        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
        oh = (h + 2 * p - k) // s + 1
        ow = (w + 2 * p - k) // s + 1
        cols = self._im2col(xp, oh, ow)
        w2 = self.params["w"].reshape(self.out_channels, -1)
        out = np.matmul(w2, cols) + self.params["b"][:, None]
        self._cache = (xp, oh, ow)
        return out.reshape(n, self.out_channels, oh, ow)

    def backward(self, dout):
        xp, oh, ow = self._cache
        k, s, p = self.kernel_size, self.stride, self.padding
        n = xp.shape[0]
        d2 = dout.reshape(n, self.out_channels, oh * ow)
        cols = self._im2col(xp, oh, ow)

        dw2 = np.matmul(d2, cols.transpose(0, 2, 1)).sum(axis=0)
        self.grads = {
            "w": dw2.reshape(self.params["w"].shape),
            "b": d2.sum(axis=(0, 2)),
        }

        w2 = self.params["w"].reshape(self.out_channels, -1)
        dcols = np.matmul(w2.T, d2).reshape(n, self.in_channels, k, k, oh, ow)
        dxp = np.zeros_like(xp)
        for i in range(k):
            for j in range(k):
                dxp[:, :, i : i + s * oh : s, j : j + s * ow : s] += dcols[:, :, i, j]
        if p:
            return dxp[:, :, p:-p, p:-p]
        return dxp


class ConvTranspose2d(Layer):
    """Transposed convolution with kernel == stride (non-overlapping)."""

    def __init__(self, in_channels, out_channels, kernel_size=2, stride=2,
                 *, rng: np.random.Generator, dtype=np.float32):
        super().__init__()
        if kernel_size != stride:
            raise ValueError("only kernel_size == stride is supported")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.params = {
            "w": he_uniform(rng, (in_channels, out_channels, kernel_size, kernel_size), in_channels, dtype),
            "b": np.zeros(out_channels, dtype=dtype),
        }
        self._cache = None

    def forward(self, x, training):
        k = self.kernel_size
        n, c, h, w = x.shape
        out = np.empty((n, self.out_channels, h * k, w * k), dtype=x.dtype)
        for i in range(k):
            for j in range(k):
                piece = np.tensordot(x, self.params["w"][:, :, i, j], axes=([1], [0]))
                out[:, :, i::k, j::k] = piece.transpose(0, 3, 1, 2)
        out += self.params["b"][None, :, None, None]
        self._cache = x
        return out

    def backward(self, dout):
        x = self._cache
        k = self.kernel_size
        dw = np.empty_like(self.params["w"])
        dx = np.zeros_like(x)
        for i in range(k):
            for j in range(k):
                dpart = dout[:, :, i::k, j::k]
                dw[:, :, i, j] = np.tensordot(x, dpart, axes=([0, 2, 3], [0, 2, 3]))
                dx += np.tensordot(dpart, self.params["w"][:, :, i, j], axes=([1], [1])).transpose(0, 3, 1, 2)
        self.grads = {"w": dw, "b": dout.sum(axis=(0, 2, 3))}
        return dx


class BatchNorm2d(Layer):
    """Batch normalization over (N, H, W) per channel, biased variance."""

    def __init__(self, channels, eps=1e-5, momentum=0.1, *, dtype=np.float32):
        super().__init__()
        self.channels = channels
        self.eps = eps
        self.momentum = momentum
        self.params = {
            "gamma": np.ones(channels, dtype=dtype),
            "beta": np.zeros(channels, dtype=dtype),
        }
        self.buffers = {
            "running_mean": np.zeros(channels, dtype=dtype),
            "running_var": np.ones(channels, dtype=dtype),
        }
        self._cache = None

    def forward(self, x, training):
        if training:
            mean = x.mean(axis=(0, 2, 3))
            var = x.var(axis=(0, 2, 3))
            m = self.momentum
            self.buffers["running_mean"] *= 1 - m
            self.buffers["running_mean"] += m * mean
            self.buffers["running_var"] *= 1 - m
            self.buffers["running_var"] += m * var
        else:
            mean = self.buffers["running_mean"]
            var = self.buffers["running_var"]
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean[None, :, None, None]) * inv[None, :, None, None]
        self._cache = (xhat, inv, x.shape[0] * x.shape[2] * x.shape[3], training)
        return self.params["gamma"][None, :, None, None] * xhat + self.params["beta"][None, :, None, None]

    def backward(self, dout):
        xhat, inv, m, training = self._cache
        dgamma = (dout * xhat).sum(axis=(0, 2, 3))
        dbeta = dout.sum(axis=(0, 2, 3))
        self.grads = {"gamma": dgamma, "beta": dbeta}
        scale = (self.params["gamma"] * inv)[None, :, None, None]
        if not training:
            return scale * dout
        return scale * (
            dout
            - dbeta[None, :, None, None] / m
            - xhat * dgamma[None, :, None, None] / m
        )


class ReLU(Layer):
    def forward(self, x, training):
        self._mask = x > 0
        return np.where(self._mask, x, 0)

    def backward(self, dout):
        return np.where(self._mask, dout, 0)


class MaxPool2d(Layer):
    """2x2 max pooling, stride 2; ties route the gradient to the first max."""

    def forward(self, x, training):
        n, c, h, w = x.shape
        if h % 2 or w % 2:
            raise ValueError(f"max pooling needs even spatial dims, got {h}x{w}")
        windows = (
            x.reshape(n, c, h // 2, 2, w // 2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, h // 2, w // 2, 4)
        )
        self._argmax = windows.argmax(axis=-1)
        self._in_shape = x.shape
        return np.take_along_axis(windows, self._argmax[..., None], axis=-1)[..., 0]

    def backward(self, dout):
        n, c, h, w = self._in_shape
        dwindows = np.zeros((n, c, h // 2, w // 2, 4), dtype=dout.dtype)
        np.put_along_axis(dwindows, self._argmax[..., None], dout[..., None], axis=-1)
        return (
            dwindows.reshape(n, c, h // 2, w // 2, 2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(n, c, h, w)
        )


class Concat(Layer):
    """Channel concatenation of a skip tensor with the upsampled path."""

    def forward_pair(self, skip: np.ndarray, up: np.ndarray) -> np.ndarray:
        self._split = skip.shape[1]
        return np.concatenate([skip, up], axis=1)

    def backward(self, dout):
        return dout[:, : self._split], dout[:, self._split :]

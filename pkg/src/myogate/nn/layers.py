"""Network layers with explicit forward/backward passes.

Every layer operates on batched arrays (leading N axis) and caches what its
backward pass needs. Convolution is fixed at 3x3 kernels with padding 1, so
spatial dimensions are preserved; that is the only convolution this engine
supports.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError, StateError


class Layer:
    """Base layer: forward caches, backward consumes the cache exactly once."""

    kind = "base"

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params(self) -> list[np.ndarray]:
        return []

    def grads(self) -> list[np.ndarray]:
        return []

    def spec(self) -> dict:
        return {"kind": self.kind}

    def _take_cache(self):
        cache = getattr(self, "_cache", None)
        if cache is None:
            raise StateError(f"{self.kind}: backward called before forward")
        self._cache = None
        return cache


class Conv2d(Layer):
    """3x3 cross-correlation with padding 1: (N,C,H,W) -> (N,K,H,W)."""

    kind = "conv2d"
    KERNEL = 3
    PADDING = 1

    def __init__(self, in_channels: int, out_channels: int, rng: np.random.Generator, dtype=np.float32):
        self.in_channels = in_channels
        self.out_channels = out_channels
        fan_in = in_channels * self.KERNEL * self.KERNEL
        limit = np.sqrt(1.0 / fan_in)
        self.w = rng.uniform(-limit, limit, size=(out_channels, in_channels, 3, 3)).astype(dtype)
        self.b = np.zeros(out_channels, dtype=dtype)
        self.gw = None
        self.gb = None
        self._cache = None

    def spec(self):
        return {"kind": self.kind, "in_channels": self.in_channels, "out_channels": self.out_channels}

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.gw, self.gb]

    def _im2col(self, padded, h, w):
        n, c = padded.shape[0], padded.shape[1]
        cols = np.empty((n, c, 3, 3, h, w), dtype=padded.dtype)
        for di in range(3):
            for dj in range(3):
                cols[:, :, di, dj] = padded[:, :, di:di + h, dj:dj + w]
        return cols.reshape(n, c * 9, h * w)

    def forward(self, x):
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ConfigurationError(
                f"conv2d: kernel shape {self.w.shape} incompatible with input shape {x.shape}"
            )
        n, _, h, w = x.shape
        padded = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
        cols = self._im2col(padded, h, w)
        w2 = self.w.reshape(self.out_channels, -1)
        out = np.matmul(w2, cols).reshape(n, self.out_channels, h, w)
        out += self.b[:, None, None]
        self._cache = (cols, (n, h, w))
        return out

    def backward(self, grad):
        cols, (n, h, w) = self._take_cache()
        g2 = grad.reshape(n, self.out_channels, h * w)
        self.gb = g2.sum(axis=(0, 2))
        self.gw = np.tensordot(g2, cols, axes=([0, 2], [0, 2])).reshape(self.w.shape)
        w2 = self.w.reshape(self.out_channels, -1)
        dcols = np.matmul(w2.T, g2).reshape(n, self.in_channels, 3, 3, h, w)
        dpadded = np.zeros((n, self.in_channels, h + 2, w + 2), dtype=grad.dtype)
        for di in range(3):
            for dj in range(3):
                dpadded[:, :, di:di + h, dj:dj + w] += dcols[:, :, di, dj]
        return dpadded[:, :, 1:h + 1, 1:w + 1]


class Dense(Layer):
    """Affine map: (N,n) -> (N,m) with weights (m,n)."""

    kind = "dense"

    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator, dtype=np.float32):
        self.in_features = in_features
        self.out_features = out_features
        limit = np.sqrt(1.0 / in_features)
        self.w = rng.uniform(-limit, limit, size=(out_features, in_features)).astype(dtype)
        self.b = np.zeros(out_features, dtype=dtype)
        self.gw = None
        self.gb = None
        self._cache = None

    def spec(self):
        return {"kind": self.kind, "in_features": self.in_features, "out_features": self.out_features}

    def params(self):
        return [self.w, self.b]

    def grads(self):
        return [self.gw, self.gb]

    def forward(self, x):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ConfigurationError(
                f"dense: weight shape {self.w.shape} incompatible with input shape {x.shape}"
            )
        self._cache = x
        return x @ self.w.T + self.b

    def backward(self, grad):
        x = self._take_cache()
        self.gw = grad.T @ x
        self.gb = grad.sum(axis=0)
        return grad @ self.w


class ReLU(Layer):
    kind = "relu"

    def __init__(self):
        self._cache = None

    def forward(self, x):
        self._cache = x > 0
        return np.where(self._cache, x, x.dtype.type(0))

    def backward(self, grad):
        mask = self._take_cache()
        return np.where(mask, grad, grad.dtype.type(0))


class LeakyReLU(Layer):
    kind = "leaky-relu"

    def __init__(self, slope: float = 0.2):
        self.slope = slope
        self._cache = None

    def spec(self):
        return {"kind": self.kind, "slope": self.slope}

    def forward(self, x):
        self._cache = x > 0
        return np.where(self._cache, x, x * x.dtype.type(self.slope))

    def backward(self, grad):
        mask = self._take_cache()
        return np.where(mask, grad, grad * grad.dtype.type(self.slope))


class Sigmoid(Layer):
    kind = "sigmoid"

    def __init__(self):
        self._cache = None

    def forward(self, x):
        # split by sign so exp never overflows
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        self._cache = out
        return out

    def backward(self, grad):
        y = self._take_cache()
        return grad * y * (1.0 - y)


class Softmax(Layer):
    """Row-wise softmax with max subtraction; stable up to inputs of ~1e4."""

    kind = "softmax"

    def __init__(self):
        self._cache = None

    def forward(self, x):
        shifted = x - x.max(axis=-1, keepdims=True)
        ex = np.exp(shifted)
        out = ex / ex.sum(axis=-1, keepdims=True)
        # keep outputs strictly positive even where exp underflows
        np.maximum(out, np.finfo(out.dtype).tiny, out=out)
        self._cache = out
        return out

    def backward(self, grad):
        p = self._take_cache()
        inner = (grad * p).sum(axis=-1, keepdims=True)
        return p * (grad - inner)


class Flatten(Layer):
    kind = "flatten"

    def __init__(self):
        self._cache = None

    def forward(self, x):
        self._cache = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, grad):
        shape = self._take_cache()
        return grad.reshape(shape)


def conv2d_forward(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray, padding: int = 1) -> np.ndarray:
    """Single-sample convolution: (C,H,W) with kernels (K,C,3,3) -> (K,H,W)."""
    kernels = np.asarray(kernels)
    bias = np.asarray(bias)
    x = np.asarray(x)
    if padding != 1:
        raise ConfigurationError(f"conv2d supports padding=1 only, got {padding}")
    if kernels.ndim != 4 or kernels.shape[2:] != (3, 3):
        raise ConfigurationError(f"conv2d kernels must be (K,C,3,3), got {kernels.shape}")
    if x.ndim != 3 or kernels.shape[1] != x.shape[0]:
        raise ConfigurationError(
            f"conv2d: kernel shape {kernels.shape} incompatible with input shape {x.shape}"
        )
    rng = np.random.default_rng(0)
    layer = Conv2d(x.shape[0], kernels.shape[0], rng, dtype=kernels.dtype)
    layer.w = kernels
    layer.b = bias
    return layer.forward(x[None])[0]


def dense_forward(x: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Single-sample affine map: (n,) with weights (m,n) -> (m,)."""
    x = np.asarray(x)
    weights = np.asarray(weights)
    if x.ndim != 1 or weights.ndim != 2 or weights.shape[1] != x.shape[0]:
        raise ConfigurationError(
            f"dense: weight shape {weights.shape} incompatible with input length {x.shape}"
        )
    return weights @ x + np.asarray(bias)


def softmax(logits: np.ndarray) -> np.ndarray:
    """Softmax of a single logit vector (max-subtracted)."""
    logits = np.asarray(logits)
    return Softmax().forward(logits[None])[0]

"""Sequential network container: construction from layer specs, forward,
backward, and gradient plumbing for the mean batch loss."""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError, ConfigurationError
from . import layers as L
from .losses import batch_loss
from .rng import make_rng


def _build_layer(spec: dict, rng: np.random.Generator, dtype) -> L.Layer:
    kind = spec["kind"]
    if kind == "conv2d":
        return L.Conv2d(spec["in_channels"], spec["out_channels"], rng, dtype)
    if kind == "dense":
        return L.Dense(spec["in_features"], spec["out_features"], rng, dtype)
    if kind == "relu":
        return L.ReLU()
    if kind == "leaky-relu":
        return L.LeakyReLU(spec.get("slope", 0.2))
    if kind == "sigmoid":
        return L.Sigmoid()
    if kind == "softmax":
        return L.Softmax()
    if kind == "flatten":
        return L.Flatten()
    raise ConfigurationError(f"unknown layer kind {kind!r}")


class Network:
    """Ordered layers plus the seed that initialized them.

    Forward is a pure function of (weights, input); training mutates weights
    in place through the optimizer only.
    """

    def __init__(self, layers: list[L.Layer], rng_seed: int, dtype=np.float32):
        self.layers = layers
        self.rng_seed = rng_seed
        self.dtype = np.dtype(dtype)

    @classmethod
    def build(cls, specs: list[dict], seed: int, dtype=np.float32) -> "Network":
        rng = make_rng(seed)
        built = [_build_layer(spec, rng, dtype) for spec in specs]
        return cls(built, seed, dtype)

    def specs(self) -> list[dict]:
        return [layer.spec() for layer in self.layers]

    def forward(self, x: np.ndarray) -> np.ndarray:
        out = np.ascontiguousarray(x, dtype=self.dtype)
        for layer in self.layers:
            out = layer.forward(out)
        return out

    def forward_single(self, x: np.ndarray) -> np.ndarray:
        return self.forward(np.asarray(x)[None])[0]

    def backward(self, grad_out: np.ndarray) -> np.ndarray:
        grad = np.asarray(grad_out, dtype=self.dtype)
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in layer.params()]

    def gradients(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in layer.grads()]

    def set_parameters(self, values: list[np.ndarray]) -> None:
        current = self.parameters()
        if len(values) != len(current):
            raise ConfigurationError(f"expected {len(current)} weight tensors, got {len(values)}")
        for dst, src in zip(current, values):
            if dst.shape != src.shape:
                raise ConfigurationError(f"weight shape mismatch: {dst.shape} vs {src.shape}")
            dst[...] = src

    def snapshot(self) -> list[np.ndarray]:
        return [p.copy() for p in self.parameters()]

    def copy(self) -> "Network":
        dup = Network.build(self.specs(), self.rng_seed, self.dtype)
        dup.set_parameters(self.parameters())
        return dup

    def astype(self, dtype) -> "Network":
        dup = Network.build(self.specs(), self.rng_seed, dtype)
        dup.set_parameters([p.astype(dtype) for p in self.parameters()])
        return dup

    def loss_only(self, inputs: np.ndarray, targets, loss: str) -> float:
        losses, _ = batch_loss(loss)(self.forward(inputs), targets)
        return float(np.mean(losses))

    def loss_and_gradients(self, inputs: np.ndarray, targets, loss: str, grad_scale: float = 1.0):
        """Mean batch loss and its gradients, one array per weight tensor."""
        inputs = np.asarray(inputs)
        if inputs.shape[0] == 0:
            raise ArgumentError("empty batch")
        pred = self.forward(inputs)
        losses, dpred = batch_loss(loss)(pred, targets)
        scale = self.dtype.type(grad_scale / inputs.shape[0])
        self.backward(dpred * scale)
        return float(np.mean(losses) * grad_scale), self.gradients()

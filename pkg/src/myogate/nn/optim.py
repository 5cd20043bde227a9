"""In-place weight updates: plain SGD and bias-corrected Adam."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError


class Sgd:
    algorithm = "sgd"

    def __init__(self, learning_rate: float):
        self.learning_rate = learning_rate
        self.step_count = 0

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        _check_shapes(params, grads)
        self.step_count += 1
        for p, g in zip(params, grads):
            p -= p.dtype.type(self.learning_rate) * g


class Adam:
    """Adam with the standard bias correction, eps added outside the sqrt."""

    algorithm = "adam"

    def __init__(self, learning_rate: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self._m: list[np.ndarray] | None = None
        self._v: list[np.ndarray] | None = None

    def step(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        _check_shapes(params, grads)
        if self._m is None:
            self._m = [np.zeros_like(p) for p in params]
            self._v = [np.zeros_like(p) for p in params]
        self.step_count += 1
        t = self.step_count
        b1, b2 = self.beta1, self.beta2
        correction1 = 1.0 - b1 ** t
        correction2 = 1.0 - b2 ** t
        for p, g, m, v in zip(params, grads, self._m, self._v):
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            m_hat = m / correction1
            v_hat = v / correction2
            p -= p.dtype.type(self.learning_rate) * m_hat / (np.sqrt(v_hat) + self.eps)


def _check_shapes(params, grads):
    if len(params) != len(grads):
        raise ConfigurationError(f"{len(params)} weight tensors but {len(grads)} gradients")
    for p, g in zip(params, grads):
        if g is None or p.shape != g.shape:
            got = None if g is None else g.shape
            raise ConfigurationError(f"gradient shape {got} does not match weight shape {p.shape}")

"""Gradient verification against central finite differences.

Runs only in 64-bit mode; 32-bit rounding would drown the signal at the
1e-4 tolerance this is meant to certify.

Two practical details make full-network sweeps sound and fast:

* Piecewise-linear activations (relu, leaky-relu) make the loss
  non-differentiable wherever a perturbation pushes a pre-activation across
  zero; a finite difference across such a kink measures nothing. Crossings
  are detected exactly by comparing activation signs between the two
  perturbed passes and the affected comparisons are skipped (typically well
  under 1% of weights).
* Perturbing a weight in layer i cannot change anything upstream, so the
  base forward pass is cached per layer and each probe re-runs only the
  suffix starting at the perturbed layer.
"""

from __future__ import annotations

import numpy as np

from ..errors import StateError
from .losses import batch_loss
from .network import Network

_KINK_KINDS = ("relu", "leaky-relu")


def _suffix_eval(layers, start, x, loss_fn, targets):
    """Loss of layers[start:] applied to x, plus activation signs at kinks."""
    out = x
    signs = []
    for layer in layers[start:]:
        if layer.kind in _KINK_KINDS:
            signs.append(out > 0)
        out = layer.forward(out)
    losses, _ = loss_fn(out, targets)
    return float(np.mean(losses)), signs


def _signs_equal(a, b):
    return all(np.array_equal(x, y) for x, y in zip(a, b))


def gradient_check(
    net: Network,
    inputs: np.ndarray,
    targets,
    loss: str = "mse",
    epsilon: float = 1e-3,
    max_elements_per_tensor: int | None = None,
    rng: np.random.Generator | None = None,
    refine_threshold: float = 1e-5,
) -> float:
    """Max over weights of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).

    ``max_elements_per_tensor`` subsamples large tensors (deterministically
    when ``rng`` is seeded); the default checks every element. Elements whose
    first-pass relative error exceeds ``refine_threshold`` are re-estimated
    with a second central difference at epsilon/2 and Richardson
    extrapolation, which removes the h^2 truncation term that otherwise
    dominates for small-gradient weights with curvature.
    """
    if net.dtype != np.float64:
        raise StateError("gradient_check requires a float64 network (use net.astype(np.float64))")
    inputs = np.asarray(inputs, dtype=np.float64)
    loss_fn = batch_loss(loss)
    _, grads = net.loss_and_gradients(inputs, targets, loss)
    grads = [g.copy() for g in grads]

    # cache each layer's input from an unperturbed pass
    layer_inputs = []
    out = inputs
    for layer in net.layers:
        layer_inputs.append(out)
        out = layer.forward(out)

    worst = 0.0
    grad_iter = iter(grads)
    for layer_idx, layer in enumerate(net.layers):
        base_x = layer_inputs[layer_idx]
        params = layer.params()
        if not params:
            continue
        _, base_signs = _suffix_eval(net.layers, layer_idx, base_x, loss_fn, targets)
        for p in params:
            g = next(grad_iter)
            flat = p.reshape(-1)
            gflat = g.reshape(-1)
            idxs = np.arange(flat.size)
            if max_elements_per_tensor is not None and flat.size > max_elements_per_tensor:
                idxs = (rng or np.random.default_rng(0)).choice(
                    flat.size, max_elements_per_tensor, replace=False
                )
            for i in idxs:
                orig = flat[i]
                flat[i] = orig + epsilon
                lp, signs_p = _suffix_eval(net.layers, layer_idx, base_x, loss_fn, targets)
                flat[i] = orig - epsilon
                lm, signs_m = _suffix_eval(net.layers, layer_idx, base_x, loss_fn, targets)
                flat[i] = orig
                if not (_signs_equal(signs_p, base_signs) and _signs_equal(signs_m, base_signs)):
                    continue  # kink crossed: the finite difference is undefined here
                numeric = (lp - lm) / (2.0 * epsilon)
                analytic = gflat[i]
                rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
                if rel > refine_threshold:
                    half = epsilon / 2.0
                    flat[i] = orig + half
                    lp2, signs_p = _suffix_eval(net.layers, layer_idx, base_x, loss_fn, targets)
                    flat[i] = orig - half
                    lm2, signs_m = _suffix_eval(net.layers, layer_idx, base_x, loss_fn, targets)
                    flat[i] = orig
                    if not (_signs_equal(signs_p, base_signs) and _signs_equal(signs_m, base_signs)):
                        continue
                    numeric = (4.0 * (lp2 - lm2) / (2.0 * half) - numeric) / 3.0
                    rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
                if rel > worst:
                    worst = rel
    # restore caches for any later backward() users
    net.forward(inputs)
    return worst

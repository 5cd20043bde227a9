"""Loss functions.

The batched variants return per-sample losses plus the gradient with respect
to the prediction array; the scalar helpers mirror the same math for single
values. Probabilities are clamped to [EPS, 1-EPS] before any log.
"""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError

EPS = 1e-7


def bce_loss(prediction: float, target: int) -> float:
    """Binary cross-entropy -[t log p + (1-t) log(1-p)] for one prediction."""
    if target not in (0, 1):
        raise ArgumentError(f"bce target must be 0 or 1, got {target!r}")
    p = min(max(float(prediction), EPS), 1.0 - EPS)
    return -(target * np.log(p) + (1 - target) * np.log1p(-p))


def cross_entropy_loss(probabilities: np.ndarray, true_class: int) -> float:
    """-log p[true_class] over a probability vector."""
    probabilities = np.asarray(probabilities)
    if not 0 <= true_class < probabilities.shape[-1]:
        raise ArgumentError(
            f"class index {true_class} out of range for {probabilities.shape[-1]} classes"
        )
    p = max(float(probabilities[true_class]), EPS)
    return -float(np.log(p))


def _bce_batch(pred: np.ndarray, targets: np.ndarray):
    t = np.asarray(targets, dtype=pred.dtype).reshape(pred.shape)
    p = np.clip(pred, EPS, 1.0 - EPS)
    losses = -(t * np.log(p) + (1 - t) * np.log1p(-p))
    grad = (p - t) / (p * (1.0 - p))
    axes = tuple(range(1, pred.ndim))
    return losses.sum(axis=axes) if axes else losses, grad


def _cross_entropy_batch(pred: np.ndarray, targets: np.ndarray):
    labels = np.asarray(targets, dtype=np.int64)
    if labels.min() < 0 or labels.max() >= pred.shape[1]:
        raise ArgumentError(
            f"class label outside [0, {pred.shape[1]}) in batch: {labels.min()}..{labels.max()}"
        )
    rows = np.arange(pred.shape[0])
    p = np.clip(pred[rows, labels], EPS, 1.0)
    losses = -np.log(p)
    grad = np.zeros_like(pred)
    grad[rows, labels] = -1.0 / p
    return losses, grad


def _mse_batch(pred: np.ndarray, targets: np.ndarray):
    t = np.asarray(targets, dtype=pred.dtype).reshape(pred.shape)
    diff = pred - t
    axes = tuple(range(1, pred.ndim))
    losses = 0.5 * (diff * diff).sum(axis=axes) if axes else 0.5 * diff * diff
    return losses, diff


BATCH_LOSSES = {
    "bce": _bce_batch,
    "cross_entropy": _cross_entropy_batch,
    "mse": _mse_batch,
}


def batch_loss(name: str):
    try:
        return BATCH_LOSSES[name]
    except KeyError:
        raise ArgumentError(f"unknown loss {name!r}; expected one of {sorted(BATCH_LOSSES)}")

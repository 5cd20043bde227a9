"""The gesture CNN: two shape-preserving 3x3 conv layers over the
channels-by-samples matrix, a 128-wide hidden layer, and a softmax head
whose width equals the number of known classes. Its probability vectors
are the feature space everything downstream operates in."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .data import LabeledWindow, NormStats, compute_norm_stats
from .errors import ArgumentError, ConfigurationError, DataError
from .nn import Adam, Network, load_model, save_model
from .nn.rng import make_rng

logger = logging.getLogger(__name__)


@dataclass
class CnnConfig:
    n_channel: int
    n_sample_points: int
    n_known: int
    conv_kernels: int = 32
    fc1_width: int = 128
    epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    logit_features: bool = False  # expose pre-softmax logits instead of probabilities

    def __post_init__(self):
        if self.n_known < 2:
            raise ConfigurationError(f"need at least 2 known classes, got {self.n_known}")
        if self.fc1_width <= self.n_known:
            raise ConfigurationError(
                f"fc1_width ({self.fc1_width}) must exceed the output width ({self.n_known})"
            )


def build_cnn_network(config: CnnConfig) -> Network:
    flat = config.conv_kernels * config.n_channel * config.n_sample_points
    specs = [
        {"kind": "conv2d", "in_channels": 1, "out_channels": config.conv_kernels},
        {"kind": "leaky-relu", "slope": 0.2},
        {"kind": "conv2d", "in_channels": config.conv_kernels, "out_channels": config.conv_kernels},
        {"kind": "leaky-relu", "slope": 0.2},
        {"kind": "flatten"},
        {"kind": "dense", "in_features": flat, "out_features": config.fc1_width},
        {"kind": "relu"},
        {"kind": "dense", "in_features": config.fc1_width, "out_features": config.n_known},
        {"kind": "softmax"},
    ]
    return Network.build(specs, config.seed)


@dataclass(frozen=True)
class FeatureVector:
    """Length-n_known probability vector emitted by the classifier."""

    values: np.ndarray
    source: str  # "real" | "synthetic"
    class_label: int | None = None


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_accuracy: float


@dataclass
class TrainHistory:
    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int = -1


@dataclass
class CnnModel:
    config: CnnConfig
    network: Network
    class_ids: tuple[int, ...]
    norm_stats: NormStats | None

    def label_to_index(self, label: int) -> int:
        try:
            return self.class_ids.index(label)
        except ValueError:
            raise DataError(f"label {label} is not one of the known classes {self.class_ids}")


def _windows_to_batch(model_or_config, windows: Sequence[LabeledWindow],
                      stats: NormStats | None) -> np.ndarray:
    config = model_or_config.config if isinstance(model_or_config, CnnModel) else model_or_config
    batch = np.empty((len(windows), 1, config.n_channel, config.n_sample_points), np.float32)
    for i, w in enumerate(windows):
        m = w.matrix
        if m.shape != (config.n_channel, config.n_sample_points):
            raise ArgumentError(
                f"window shape {m.shape} does not match configured "
                f"({config.n_channel}, {config.n_sample_points})"
            )
        batch[i, 0] = stats.apply_matrix(m) if stats is not None else m
    return batch


def train_cnn(
    train_windows: Sequence[LabeledWindow],
    val_windows: Sequence[LabeledWindow],
    known_classes: Sequence[int],
    config: CnnConfig,
    norm_stats: NormStats | None = None,
) -> tuple[CnnModel, TrainHistory]:
    """Minimize mean cross-entropy with Adam; return the epoch snapshot with
    the best validation accuracy (ties resolved toward the later epoch)."""
    if not train_windows:
        raise ConfigurationError("cnn_train is empty")
    class_ids = tuple(int(c) for c in known_classes)
    if len(class_ids) != config.n_known:
        raise ConfigurationError(
            f"{len(class_ids)} known classes but config.n_known = {config.n_known}"
        )
    index_of = {c: i for i, c in enumerate(class_ids)}
    for w in (*train_windows, *val_windows):
        if int(w.class_label) not in index_of:
            raise DataError(f"label {w.class_label} outside the known set {class_ids}")

    if norm_stats is None:
        norm_stats = compute_norm_stats(train_windows)
    x_train = _windows_to_batch(config, train_windows, norm_stats)
    y_train = np.array([index_of[int(w.class_label)] for w in train_windows], np.int64)
    x_val = _windows_to_batch(config, val_windows, norm_stats)
    y_val = np.array([index_of[int(w.class_label)] for w in val_windows], np.int64)

    net = build_cnn_network(config)
    opt = Adam(config.learning_rate)
    shuffle_rng = make_rng(config.seed, stream=7)

    history = TrainHistory()
    best_acc = -1.0
    best_weights = net.snapshot()
    n = len(train_windows)
    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start:start + config.batch_size]
            loss, grads = net.loss_and_gradients(x_train[idx], y_train[idx], "cross_entropy")
            opt.step(net.parameters(), grads)
            losses.append(loss)
        if len(x_val):
            pred = net.forward(x_val).argmax(axis=1)
            val_acc = float((pred == y_val).mean())
        else:
            val_acc = 0.0
        history.epochs.append(EpochStats(epoch, float(np.mean(losses)), val_acc))
        if val_acc >= best_acc:
            best_acc = val_acc
            best_weights = net.snapshot()
            history.best_epoch = epoch
    net.set_parameters(best_weights)
    model = CnnModel(config=config, network=net, class_ids=class_ids, norm_stats=norm_stats)
    return model, history


def classify(model: CnnModel, window: LabeledWindow) -> tuple[FeatureVector, int]:
    """Feature vector plus argmax class index (ties go to the lowest index)."""
    features = extract_features(model, [window])[0]
    return features, int(np.argmax(features.values))


def extract_features(model: CnnModel, windows: Sequence[LabeledWindow]) -> list[FeatureVector]:
    batch = _windows_to_batch(model, windows, model.norm_stats)
    if model.config.logit_features:
        # run every layer except the softmax head
        out = batch
        for layer in model.network.layers[:-1]:
            out = layer.forward(out)
    else:
        out = model.network.forward(batch)
    return [
        FeatureVector(values=out[i].copy(), source="real", class_label=int(w.class_label))
        for i, w in enumerate(windows)
    ]


def eval_closed(model: CnnModel, windows: Sequence[LabeledWindow]) -> tuple[float, np.ndarray]:
    """Closed-set accuracy and an n_known x n_known confusion matrix."""
    if not windows:
        raise ArgumentError("eval_closed needs at least one window")
    k = model.config.n_known
    confusion = np.zeros((k, k), dtype=np.int64)
    batch = _windows_to_batch(model, windows, model.norm_stats)
    pred = model.network.forward(batch).argmax(axis=1)
    for w, p in zip(windows, pred):
        confusion[model.label_to_index(int(w.class_label)), int(p)] += 1
    accuracy = float(np.trace(confusion)) / len(windows)
    return accuracy, confusion


def save_cnn(model: CnnModel, stem: str | Path) -> None:
    stats = model.norm_stats
    meta = {
        "model_type": "cnn_classifier",
        "class_ids": ",".join(str(c) for c in model.class_ids),
        "n_channel": str(model.config.n_channel),
        "n_sample_points": str(model.config.n_sample_points),
        "logit_features": str(int(model.config.logit_features)),
    }
    if stats is not None:
        meta["norm_mean"] = ",".join(np.format_float_scientific(v, unique=True) for v in stats.mean)
        meta["norm_std"] = ",".join(np.format_float_scientific(v, unique=True) for v in stats.std)
    save_model(model.network, stem, meta=meta)


def load_cnn(stem: str | Path) -> CnnModel:
    net, meta = load_model(stem)
    if meta.get("model_type") != "cnn_classifier":
        raise ConfigurationError(f"{stem} is not a classifier model file")
    class_ids = tuple(int(c) for c in meta["class_ids"].split(","))
    stats = None
    if "norm_mean" in meta:
        stats = NormStats(
            mean=np.array([np.float32(v) for v in meta["norm_mean"].split(",")]),
            std=np.array([np.float32(v) for v in meta["norm_std"].split(",")]),
        )
    config = CnnConfig(
        n_channel=int(meta["n_channel"]),
        n_sample_points=int(meta["n_sample_points"]),
        n_known=len(class_ids),
        seed=net.rng_seed,
        logit_features=bool(int(meta.get("logit_features", "0"))),
    )
    return CnnModel(config=config, network=net, class_ids=class_ids, norm_stats=stats)

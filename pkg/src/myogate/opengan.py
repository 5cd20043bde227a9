"""Adversarial training on classifier feature vectors.

The generator maps Gaussian noise to synthetic feature vectors (softmax
head, so fakes live on the same probability simplex as real features); the
discriminator scores a feature vector's realness in (0, 1). Discriminator
snapshots are taken every epoch together with the validation scores that
produced their AUC, the best-AUC snapshot is selected, and its ROC yields
the accept threshold.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import metrics
from .classifier import FeatureVector
from .errors import ArgumentError, ConfigurationError, StateError
from .nn import Adam, Network, load_model, save_model
from .nn.losses import EPS
from .nn.rng import make_rng

logger = logging.getLogger(__name__)

SELECTION_MODES = ("fake-only", "paper-faithful")
GENERATOR_LOSSES = ("saturating", "nonsaturating")


@dataclass
class GanConfig:
    n_known: int
    n_hidden: int | None = None  # defaults to max(2, n_known // 2)
    epochs: int = 200
    batch_size: int = 32
    lr_g: float = 2e-4
    lr_d: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    seed: int = 0
    generator_loss: str = "saturating"
    selection_mode: str = "fake-only"

    def __post_init__(self):
        if self.n_hidden is None:
            self.n_hidden = min(max(2, self.n_known // 2), self.n_known - 1)
        if self.n_hidden >= self.n_known:
            raise ConfigurationError(
                f"n_hidden ({self.n_hidden}) must be smaller than n_known ({self.n_known})"
            )
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.generator_loss not in GENERATOR_LOSSES:
            raise ConfigurationError(f"generator_loss must be one of {GENERATOR_LOSSES}")
        if self.selection_mode not in SELECTION_MODES:
            raise ConfigurationError(f"selection_mode must be one of {SELECTION_MODES}")


def build_generator(config: GanConfig) -> Network:
    specs = [
        {"kind": "dense", "in_features": config.n_hidden, "out_features": 128},
        {"kind": "leaky-relu", "slope": 0.2},
        {"kind": "dense", "in_features": 128, "out_features": config.n_known},
        {"kind": "softmax"},
    ]
    return Network.build(specs, config.seed + 1)


def build_discriminator(config: GanConfig) -> Network:
    specs = [
        {"kind": "dense", "in_features": config.n_known, "out_features": 128},
        {"kind": "leaky-relu", "slope": 0.2},
        {"kind": "dense", "in_features": 128, "out_features": 64},
        {"kind": "leaky-relu", "slope": 0.2},
        {"kind": "dense", "in_features": 64, "out_features": 1},
        {"kind": "sigmoid"},
    ]
    return Network.build(specs, config.seed + 2)


@dataclass
class EpochSnapshot:
    epoch: int  # 1-based
    auc: float
    v_d: float
    v_g: float
    disc_weights: list[np.ndarray]
    gen_weights: list[np.ndarray]
    val_positive_scores: np.ndarray
    val_negative_scores: np.ndarray


@dataclass
class GanPair:
    generator: Network
    discriminator: Network
    config: GanConfig
    opt_g: Adam
    opt_d: Adam
    history: list[EpochSnapshot] = field(default_factory=list)

    @classmethod
    def create(cls, config: GanConfig) -> "GanPair":
        return cls(
            generator=build_generator(config),
            discriminator=build_discriminator(config),
            config=config,
            opt_g=Adam(config.lr_g, config.beta1, config.beta2),
            opt_d=Adam(config.lr_d, config.beta1, config.beta2),
        )


def score_features(disc: Network, features: np.ndarray) -> np.ndarray:
    """Discriminator scores, one per feature row."""
    return disc.forward(np.asarray(features, np.float32)).reshape(-1).astype(np.float64)


def _objective_values(disc: Network, gen: Network, real: np.ndarray, noise: np.ndarray):
    p_real = np.clip(score_features(disc, real), EPS, 1.0 - EPS)
    p_fake = np.clip(score_features(disc, gen.forward(noise)), EPS, 1.0 - EPS)
    v_g = float(np.mean(np.log1p(-p_fake)))
    v_d = float(np.mean(np.log(p_real)) + v_g)
    return v_d, v_g


def gan_step(pair: GanPair, real_batch: np.ndarray, noise_batch: np.ndarray) -> tuple[float, float]:
    """One adversarial update; returns the objective halves after both updates.

    The discriminator ascends V_D = mean[log D(x) + log(1 - D(G(z)))], run as
    a binary cross-entropy descent with real -> 1 and fake -> 0. The
    generator then descends V_G = mean[log(1 - D(G(z)))] on a fresh forward
    pass (or ascends log D(G(z)) in the non-saturating variant).
    """
    real = np.asarray(real_batch, np.float32)
    noise = np.asarray(noise_batch, np.float32)
    if real.shape[0] == 0 or noise.shape[0] == 0:
        raise ArgumentError("gan_step requires non-empty batches")
    if real.shape[0] != noise.shape[0]:
        raise ArgumentError(f"batch sizes differ: {real.shape[0]} real vs {noise.shape[0]} noise")
    m = real.shape[0]
    disc, gen = pair.discriminator, pair.generator

    # discriminator update on the concatenated batch; grad_scale 2 makes the
    # objective exactly (1/m) sum of both halves
    fakes = gen.forward(noise)
    d_inputs = np.concatenate([real, fakes], axis=0)
    d_targets = np.concatenate([np.ones(m, np.float32), np.zeros(m, np.float32)])
    _, d_grads = disc.loss_and_gradients(d_inputs, d_targets, "bce", grad_scale=2.0)
    pair.opt_d.step(disc.parameters(), d_grads)

    # generator update through the frozen discriminator
    g_out = gen.forward(noise)
    p = np.clip(disc.forward(g_out), EPS, 1.0 - EPS)
    if pair.config.generator_loss == "saturating":
        dp = -1.0 / (1.0 - p)  # d/dp of log(1-p), minimized directly
    else:
        dp = -1.0 / p  # d/dp of -log(p)
    dfeat = disc.backward(dp.astype(np.float32) / np.float32(m))
    gen.backward(dfeat)
    pair.opt_g.step(gen.parameters(), gen.gradients())

    return _objective_values(disc, gen, real, noise)


def train_gan(
    real_features: Sequence[FeatureVector] | np.ndarray,
    gan_val_features: Sequence[FeatureVector] | np.ndarray,
    config: GanConfig,
    unknown_val_features: Sequence[FeatureVector] | np.ndarray | None = None,
) -> GanPair:
    """Alternating updates with a per-epoch discriminator snapshot and AUC.

    In ``fake-only`` mode the epoch AUC scores held-out real features against
    freshly generated fakes; ``paper-faithful`` mode scores them against a
    held-out unknown-class feature set, which must be provided.
    """
    real = _as_matrix(real_features, config.n_known)
    gan_val = _as_matrix(gan_val_features, config.n_known)
    if real.shape[0] < config.batch_size:
        raise ConfigurationError(
            f"{real.shape[0]} training features but batch_size is {config.batch_size}"
        )
    if config.selection_mode == "paper-faithful":
        if unknown_val_features is None:
            raise ConfigurationError("paper-faithful selection requires unknown_val_features")
        unknown_val = _as_matrix(unknown_val_features, config.n_known)
    else:
        unknown_val = None

    pair = GanPair.create(config)
    shuffle_rng = make_rng(config.seed, stream=11)
    noise_rng = make_rng(config.seed, stream=12)
    n = real.shape[0]
    batches = n // config.batch_size
    for epoch in range(1, config.epochs + 1):
        order = shuffle_rng.permutation(n)
        v_d_sum = v_g_sum = 0.0
        for b in range(batches):
            idx = order[b * config.batch_size:(b + 1) * config.batch_size]
            noise = noise_rng.standard_normal((config.batch_size, config.n_hidden)).astype(np.float32)
            v_d, v_g = gan_step(pair, real[idx], noise)
            v_d_sum += v_d
            v_g_sum += v_g
        pos_scores = score_features(pair.discriminator, gan_val)
        if unknown_val is not None:
            neg_source = unknown_val
        else:
            fresh = noise_rng.standard_normal((gan_val.shape[0], config.n_hidden)).astype(np.float32)
            neg_source = pair.generator.forward(fresh)
        neg_scores = score_features(pair.discriminator, neg_source)
        scored = [(s, 1) for s in pos_scores] + [(s, 0) for s in neg_scores]
        pair.history.append(EpochSnapshot(
            epoch=epoch,
            auc=metrics.auc(scored),
            v_d=v_d_sum / max(batches, 1),
            v_g=v_g_sum / max(batches, 1),
            disc_weights=pair.discriminator.snapshot(),
            gen_weights=pair.generator.snapshot(),
            val_positive_scores=pos_scores,
            val_negative_scores=neg_scores,
        ))
    return pair


def _as_matrix(features, n_known: int) -> np.ndarray:
    if isinstance(features, np.ndarray):
        mat = features.astype(np.float32)
    else:
        mat = np.stack([f.values for f in features]).astype(np.float32) if len(features) else \
            np.zeros((0, n_known), np.float32)
    if mat.ndim != 2 or (mat.size and mat.shape[1] != n_known):
        raise ArgumentError(f"feature matrix shape {mat.shape} does not match n_known {n_known}")
    return mat


def select_discriminator(pair: GanPair) -> EpochSnapshot:
    """Snapshot with the highest validation AUC; ties go to the later epoch."""
    if not pair.history:
        raise StateError("no training history; run train_gan first")
    best = pair.history[0]
    for snap in pair.history[1:]:
        if snap.auc >= best.auc:
            best = snap
    return best


def restore_discriminator(config: GanConfig, snapshot: EpochSnapshot) -> Network:
    net = build_discriminator(config)
    net.set_parameters(snapshot.disc_weights)
    return net


@dataclass
class SelectedDiscriminator:
    network: Network
    selection_auc: float
    tau: float
    roc: list[metrics.RocPoint]
    selection_mode: str
    degenerate: bool = False


def calibrate_threshold(
    discriminator: Network,
    positives: np.ndarray,
    negatives: np.ndarray,
    selection_auc: float | None = None,
    selection_mode: str = "fake-only",
) -> SelectedDiscriminator:
    """Pick tau at the ROC point nearest (fpr=0, tpr=1); ties take the larger tau."""
    positives = np.asarray(positives, np.float64)
    negatives = np.asarray(negatives, np.float64)
    if positives.size == 0 or negatives.size == 0:
        raise ArgumentError("calibration needs non-empty positive and negative score sets")
    scored = [(float(s), 1) for s in positives] + [(float(s), 0) for s in negatives]
    all_scores = np.concatenate([positives, negatives])
    if np.all(all_scores == all_scores[0]):
        logger.warning("degenerate ROC: all %d calibration scores equal %.6f",
                       all_scores.size, all_scores[0])
        return SelectedDiscriminator(
            network=discriminator,
            selection_auc=selection_auc if selection_auc is not None else 0.5,
            tau=float(all_scores[0]),
            roc=metrics.roc_curve(scored),
            selection_mode=selection_mode,
            degenerate=True,
        )
    roc = metrics.roc_curve(scored)
    tau = metrics.optimal_cutoff(roc)
    if selection_auc is None:
        selection_auc = metrics.auc(scored)
    return SelectedDiscriminator(
        network=discriminator,
        selection_auc=selection_auc,
        tau=float(tau),
        roc=roc,
        selection_mode=selection_mode,
    )


def save_selected(selected: SelectedDiscriminator, stem: str | Path) -> None:
    meta = {
        "model_type": "selected_discriminator",
        "tau": np.format_float_scientific(selected.tau, unique=True),
        "selection_auc": np.format_float_scientific(selected.selection_auc, unique=True),
        "selection_mode": selected.selection_mode,
        "degenerate": str(int(selected.degenerate)),
    }
    save_model(selected.network, stem, meta=meta)


def load_selected(stem: str | Path) -> SelectedDiscriminator:
    net, meta = load_model(stem)
    if meta.get("model_type") != "selected_discriminator":
        raise ConfigurationError(f"{stem} is not a selected-discriminator model file")
    return SelectedDiscriminator(
        network=net,
        selection_auc=float(meta["selection_auc"]),
        tau=float(meta["tau"]),
        roc=[],
        selection_mode=meta.get("selection_mode", "fake-only"),
        degenerate=bool(int(meta.get("degenerate", "0"))),
    )

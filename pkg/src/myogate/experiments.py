"""Experiment protocols: the full train-gate-evaluate pipeline and the
ratio / known-count / cross-matrix / cross-domain sweeps, all reproducible
from (config, seed) alone.

Modes follow the evaluation design:

* ``Close`` -- a classifier trained on every class in the dataset, scored on
  its own held-out test windows; nothing is rejected. Its accuracy is the
  closed-set reference for ARR.
* ``Open``  -- the known-class classifier applied to the open-set evaluation
  pool with every prediction executed.
* ``OpenGAN`` -- the same classifier behind the discriminator gate.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import metrics
from .classifier import (
    CnnConfig,
    CnnModel,
    TrainHistory,
    eval_closed,
    extract_features,
    train_cnn,
)
from .data import (
    DEFAULT_FRACTIONS,
    LabeledWindow,
    SplitPlan,
    make_class_profiles,
    make_split,
    synth_generate,
)
from .errors import ConfigurationError
from .gate import GatePipeline, run_stream
from .metrics import MetricsReport, Outcome
from .opengan import (
    GanConfig,
    GanPair,
    SelectedDiscriminator,
    calibrate_threshold,
    restore_discriminator,
    select_discriminator,
    train_gan,
)

MODES = ("Close", "Open", "OpenGAN")


@dataclass
class ExperimentSettings:
    """Desk-scale defaults for the synthetic pipeline; every knob is a config key."""

    channels: int = 8
    sample_rate: float = 100.0
    window_ms: float = 200.0
    windows_per_class: int = 60
    noise_floor: float = 0.05
    amplitude_jitter: float = 0.15  # between synthetic subjects
    fractions: tuple[float, float, float, float] = DEFAULT_FRACTIONS
    cnn_epochs: int = 20
    cnn_batch_size: int = 32
    cnn_lr: float = 1e-3
    gan_epochs: int = 60
    gan_batch_size: int = 32
    selection_mode: str = "fake-only"

    @property
    def n_sample_points(self) -> int:
        return int(round(self.window_ms * self.sample_rate / 1000.0))


@dataclass
class SynthDataset:
    """Synthetic stand-in for one subject: base classes plus mixture classes."""

    windows: list[LabeledWindow]
    base_classes: tuple[int, ...]
    mixture_classes: tuple[int, ...]

    @property
    def all_classes(self) -> tuple[int, ...]:
        return self.base_classes + self.mixture_classes


def synth_dataset(
    n_base: int,
    n_mixture: int,
    settings: ExperimentSettings,
    subject: int = 0,
    seed: int = 0,
) -> SynthDataset:
    """Windows for ``n_base`` learnable classes and ``n_mixture`` mixture
    classes that stand in for unknown gestures, jittered per subject."""
    known_specs, unknown_specs = make_class_profiles(
        n_base,
        n_mixture,
        channels=settings.channels,
        seed=seed,
        noise_floor=settings.noise_floor,
        amplitude_jitter=settings.amplitude_jitter if subject else 0.0,
    )
    windows = synth_generate(
        known_specs + unknown_specs,
        settings.windows_per_class,
        settings.channels,
        settings.sample_rate,
        seed=seed + 7919 * subject,
        window_ms=settings.window_ms,
        subject_id=subject,
    )
    base = tuple(range(1, n_base + 1))
    mixture = tuple(range(n_base + 1, n_base + n_mixture + 1))
    return SynthDataset(windows=windows, base_classes=base, mixture_classes=mixture)


def _cnn_config(settings: ExperimentSettings, n_known: int, seed: int) -> CnnConfig:
    return CnnConfig(
        n_channel=settings.channels,
        n_sample_points=settings.n_sample_points,
        n_known=n_known,
        epochs=settings.cnn_epochs,
        batch_size=settings.cnn_batch_size,
        learning_rate=settings.cnn_lr,
        seed=seed,
    )


def _gan_config(settings: ExperimentSettings, n_known: int, seed: int) -> GanConfig:
    return GanConfig(
        n_known=n_known,
        epochs=settings.gan_epochs,
        batch_size=settings.gan_batch_size,
        seed=seed,
        selection_mode=settings.selection_mode,
    )


def _view(windows: Sequence[LabeledWindow], indices: Sequence[int]) -> list[LabeledWindow]:
    return [windows[i] for i in indices]


@dataclass
class KnownStack:
    """Everything that depends only on (windows, known classes, seed): the
    known-side split, the trained classifier, and its feature extractions."""

    known_classes: tuple[int, ...]
    split: SplitPlan
    cnn: CnnModel
    cnn_history: TrainHistory
    closed_known_accuracy: float
    train_features: np.ndarray
    gan_val_features: np.ndarray
    test_windows: list[LabeledWindow]


def build_known_stack(
    windows: Sequence[LabeledWindow],
    known_classes: Sequence[int],
    seed: int,
    settings: ExperimentSettings,
) -> KnownStack:
    split = make_split(windows, known_classes, (), settings.fractions, seed=seed)
    train = _view(windows, split.cnn_train)
    val = _view(windows, split.cnn_val)
    test = _view(windows, split.cnn_test)
    gan_val = _view(windows, split.gan_val)
    cnn, history = train_cnn(train, val, known_classes,
                             _cnn_config(settings, len(known_classes), seed))
    closed_acc, _ = eval_closed(cnn, test)
    to_matrix = lambda ws: np.stack([f.values for f in extract_features(cnn, ws)])
    return KnownStack(
        known_classes=tuple(int(c) for c in known_classes),
        split=split,
        cnn=cnn,
        cnn_history=history,
        closed_known_accuracy=closed_acc,
        train_features=to_matrix(train),
        gan_val_features=to_matrix(gan_val),
        test_windows=test,
    )


@dataclass
class OpenSetResult:
    reports: dict[str, MetricsReport]
    selected: SelectedDiscriminator
    outcomes_gated: list[Outcome]
    pair: GanPair | None = None


def run_openset(
    stack: KnownStack,
    windows: Sequence[LabeledWindow],
    unknown_classes: Sequence[int],
    seed: int,
    settings: ExperimentSettings,
    closed_reference: float | None = None,
    modes: Sequence[str] = ("Open", "OpenGAN"),
) -> OpenSetResult:
    """Train the discriminator, calibrate the gate, and score the open-set
    evaluation pool (known test windows plus all unknown-class windows)."""
    unknown_set = {int(c) for c in unknown_classes}
    unknown_windows = [w for w in windows if int(w.class_label) in unknown_set]
    if unknown_set and not unknown_windows:
        raise ConfigurationError(f"no windows found for unknown classes {sorted(unknown_set)}")
    eval_windows = stack.test_windows + unknown_windows
    reference = closed_reference if closed_reference else stack.closed_known_accuracy

    gan_config = _gan_config(settings, len(stack.known_classes), seed)
    unknown_val = None
    if settings.selection_mode == "paper-faithful":
        unknown_val = np.stack(
            [f.values for f in extract_features(stack.cnn, unknown_windows)]
        )
    pair = train_gan(stack.train_features, stack.gan_val_features, gan_config,
                     unknown_val_features=unknown_val)
    snap = select_discriminator(pair)
    disc = restore_discriminator(gan_config, snap)
    selected = calibrate_threshold(
        disc,
        snap.val_positive_scores,
        snap.val_negative_scores,
        selection_auc=snap.auc,
        selection_mode=settings.selection_mode,
    )
    pipeline = GatePipeline(cnn=stack.cnn, discriminator=selected)
    _, gated = run_stream(pipeline, eval_windows)

    known_ids = set(stack.known_classes)
    features = extract_features(stack.cnn, eval_windows)
    open_outcomes = [
        Outcome(
            true_class=int(w.class_label),
            true_is_known=int(w.class_label) in known_ids,
            predicted_class=int(stack.cnn.class_ids[int(np.argmax(f.values))]),
        )
        for w, f in zip(eval_windows, features)
    ]

    reports: dict[str, MetricsReport] = {}
    if "Open" in modes:
        reports["Open"] = metrics.compute_report(open_outcomes, reference, "Open")
    if "OpenGAN" in modes:
        reports["OpenGAN"] = metrics.compute_report(
            gated, reference, "OpenGAN", auc_value=selected.selection_auc
        )
    return OpenSetResult(reports=reports, selected=selected, outcomes_gated=gated, pair=pair)


@dataclass
class CloseResult:
    report: MetricsReport
    accuracy: float
    cnn: CnnModel
    test_windows: list[LabeledWindow]


def run_close(
    windows: Sequence[LabeledWindow],
    classes: Sequence[int],
    seed: int,
    settings: ExperimentSettings,
    eval_windows: Sequence[LabeledWindow] | None = None,
) -> CloseResult:
    """Closed-set baseline: train on every listed class, accept everything."""
    split = make_split(windows, classes, (), settings.fractions, seed=seed)
    train = _view(windows, split.cnn_train)
    val = _view(windows, split.cnn_val)
    test = list(eval_windows) if eval_windows is not None else _view(windows, split.cnn_test)
    cnn, _ = train_cnn(train, val, classes, _cnn_config(settings, len(classes), seed))
    features = extract_features(cnn, test)
    outcomes = [
        Outcome(
            true_class=int(w.class_label),
            true_is_known=True,
            predicted_class=int(cnn.class_ids[int(np.argmax(f.values))]),
        )
        for w, f in zip(test, features)
    ]
    accuracy, _ = eval_closed(cnn, test)
    report = metrics.compute_report(outcomes, accuracy, "Close")
    return CloseResult(report=report, accuracy=accuracy, cnn=cnn, test_windows=test)


def _row(subject, seed, mode, report: MetricsReport, **extra) -> dict:
    row = {"subject": subject, "seed": seed, "mode": mode}
    row.update(extra)
    row.update({
        "aer": report.aer, "acc": report.acc, "arr": report.arr, "f1": report.f1,
        "auc": report.auc, "n_accepted": report.n_accepted, "n_rejected": report.n_rejected,
    })
    return row


def run_ratio_sweep(
    dataset: SynthDataset | list[LabeledWindow],
    n_known: int,
    unknown_counts: Sequence[int],
    seeds: Sequence[int],
    settings: ExperimentSettings,
    modes: Sequence[str] = MODES,
    subject: int = 0,
    class_pool: tuple[Sequence[int], Sequence[int]] | None = None,
) -> list[dict]:
    """Fixed known classes, one discriminator per unknown-count setting."""
    _check_modes(modes)
    if isinstance(dataset, SynthDataset):
        windows = dataset.windows
        known_pool, unknown_pool = dataset.base_classes, dataset.mixture_classes
    else:
        windows = dataset
        if class_pool is None:
            raise ConfigurationError("class_pool required for non-synthetic datasets")
        known_pool, unknown_pool = class_pool
    if len(known_pool) < n_known or len(unknown_pool) < max(unknown_counts):
        raise ConfigurationError(
            f"pool has {len(known_pool)} known / {len(unknown_pool)} unknown candidates; "
            f"need {n_known} / {max(unknown_counts)}"
        )
    known = tuple(known_pool[:n_known])
    rows = []
    for seed in seeds:
        close = None
        if "Close" in modes:
            all_classes = tuple(known_pool) + tuple(unknown_pool)
            close = run_close(windows, all_classes, seed, settings)
        stack = build_known_stack(windows, known, seed, settings)
        for count in unknown_counts:
            unknown = tuple(unknown_pool[:count])
            cell_seed = seed * 1000 + count
            result = run_openset(
                stack, windows, unknown, cell_seed, settings,
                closed_reference=close.accuracy if close else None,
                modes=[m for m in modes if m != "Close"],
            )
            for mode, report in result.reports.items():
                rows.append(_row(subject, seed, mode, report, unknown_count=count))
            if close is not None:
                rows.append(_row(subject, seed, "Close", close.report, unknown_count=count))
    return rows


def run_known_sweep(
    dataset: SynthDataset,
    known_counts: Sequence[int],
    unknown_counts: Sequence[int],
    seeds: Sequence[int],
    settings: ExperimentSettings,
    modes: Sequence[str] = MODES,
    subject: int = 0,
) -> list[dict]:
    """Vary the known-class count against fixed unknown counts (accuracy grid)."""
    _check_modes(modes)
    if max(known_counts) > len(dataset.base_classes):
        raise ConfigurationError(
            f"dataset has {len(dataset.base_classes)} base classes, need {max(known_counts)}"
        )
    rows = []
    for seed in seeds:
        close = None
        if "Close" in modes:
            close = run_close(dataset.windows, dataset.all_classes, seed, settings)
        for kc in known_counts:
            known = dataset.base_classes[:kc]
            stack = build_known_stack(dataset.windows, known, seed, settings)
            for uc in unknown_counts:
                unknown = dataset.mixture_classes[:uc]
                result = run_openset(
                    stack, dataset.windows, unknown, seed * 1000 + kc * 100 + uc,
                    settings,
                    closed_reference=close.accuracy if close else None,
                    modes=[m for m in modes if m != "Close"],
                )
                for mode, report in result.reports.items():
                    rows.append(_row(subject, seed, mode, report,
                                     known_count=kc, unknown_count=uc))
                if close is not None:
                    rows.append(_row(subject, seed, "Close", close.report,
                                     known_count=kc, unknown_count=uc))
    return rows


def run_cross_matrix(
    dataset: SynthDataset,
    n_known: int,
    ratio_counts: Sequence[int],
    seeds: Sequence[int],
    settings: ExperimentSettings,
    subject: int = 0,
) -> list[dict]:
    """Discriminators trained at one unknown-count ratio, evaluated across all
    validation compositions. Selection needs the training-ratio unknowns, so
    this protocol always runs paper-faithful."""
    settings = replace(settings, selection_mode="paper-faithful")
    known = dataset.base_classes[:n_known]
    rows = []
    for seed in seeds:
        stack = build_known_stack(dataset.windows, known, seed, settings)
        close = run_close(dataset.windows, dataset.all_classes, seed, settings)
        for train_count in ratio_counts:
            train_unknown = dataset.mixture_classes[:train_count]
            result = run_openset(
                stack, dataset.windows, train_unknown, seed * 1000 + train_count,
                settings, closed_reference=close.accuracy,
            )
            pipeline = GatePipeline(cnn=stack.cnn, discriminator=result.selected)
            for eval_count in ratio_counts:
                eval_unknown = {int(c) for c in dataset.mixture_classes[:eval_count]}
                unknown_windows = [w for w in dataset.windows
                                   if int(w.class_label) in eval_unknown]
                eval_windows = stack.test_windows + unknown_windows
                _, outcomes = run_stream(pipeline, eval_windows)
                gated = metrics.compute_report(outcomes, close.accuracy, "OpenGAN",
                                               auc_value=result.selected.selection_auc)
                rows.append(_row(subject, seed, "OpenGAN", gated,
                                 train_unknown_count=train_count,
                                 eval_unknown_count=eval_count))
                features = extract_features(stack.cnn, eval_windows)
                open_outcomes = [
                    Outcome(int(w.class_label), int(w.class_label) in set(known),
                            int(stack.cnn.class_ids[int(np.argmax(f.values))]))
                    for w, f in zip(eval_windows, features)
                ]
                rows.append(_row(subject, seed, "Open",
                                 metrics.compute_report(open_outcomes, close.accuracy, "Open"),
                                 train_unknown_count=train_count,
                                 eval_unknown_count=eval_count))
    return rows


def run_cross_domain(
    datasets: dict[int, SynthDataset],
    n_known: int,
    unknown_count: int,
    seeds: Sequence[int],
    settings: ExperimentSettings,
) -> list[dict]:
    """Train on one subject, evaluate on every subject (AER and ARR grids)."""
    if not datasets:
        raise ConfigurationError("cross-domain needs at least one subject dataset")
    rows = []
    for seed in seeds:
        stacks = {}
        closes = {}
        selects = {}
        for subject, ds in datasets.items():
            known = ds.base_classes[:n_known]
            stacks[subject] = build_known_stack(ds.windows, known, seed, settings)
            closes[subject] = run_close(ds.windows, ds.all_classes, seed, settings)
            selects[subject] = run_openset(
                stacks[subject], ds.windows, ds.mixture_classes[:unknown_count],
                seed * 1000 + subject, settings, closed_reference=closes[subject].accuracy,
            )
        for train_subject, train_ds in datasets.items():
            pipeline_cnn = stacks[train_subject].cnn
            selected = selects[train_subject].selected
            pipeline = GatePipeline(cnn=pipeline_cnn, discriminator=selected)
            for test_subject, test_ds in datasets.items():
                test_stack = stacks[test_subject]
                unknown = {int(c) for c in test_ds.mixture_classes[:unknown_count]}
                unknown_windows = [w for w in test_ds.windows if int(w.class_label) in unknown]
                eval_windows = test_stack.test_windows + unknown_windows
                # closed-set reference: the train subject's Close model scored
                # on the test subject's closed test windows
                close_cnn = closes[train_subject].cnn
                close_acc, _ = eval_closed(close_cnn, closes[test_subject].test_windows)
                _, outcomes = run_stream(pipeline, eval_windows)
                if close_acc == 0.0:
                    close_acc = 1e-9  # fully failed cross-domain baseline
                gated = metrics.compute_report(outcomes, close_acc, "OpenGAN",
                                               auc_value=selected.selection_auc)
                rows.append(_row(train_subject, seed, "OpenGAN", gated,
                                 test_subject=test_subject, unknown_count=unknown_count,
                                 close_acc=close_acc))
                features = extract_features(pipeline_cnn, eval_windows)
                known_ids = set(stacks[train_subject].known_classes)
                open_outcomes = [
                    Outcome(int(w.class_label), int(w.class_label) in known_ids,
                            int(pipeline_cnn.class_ids[int(np.argmax(f.values))]))
                    for w, f in zip(eval_windows, features)
                ]
                rows.append(_row(train_subject, seed, "Open",
                                 metrics.compute_report(open_outcomes, close_acc, "Open"),
                                 test_subject=test_subject, unknown_count=unknown_count,
                                 close_acc=close_acc))
    return rows


def _check_modes(modes: Sequence[str]) -> None:
    if not modes:
        raise ConfigurationError("mode set is empty")
    bad = [m for m in modes if m not in MODES]
    if bad:
        raise ConfigurationError(f"unknown modes {bad}; valid: {MODES}")


def aggregate_rows(rows: list[dict], group_keys: Sequence[str],
                   metrics_keys: Sequence[str] = ("aer", "acc", "arr", "f1")) -> list[dict]:
    """Mean and sample standard deviation per metric over each group."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        key = tuple(row[k] for k in group_keys)
        groups.setdefault(key, []).append(row)
    out = []
    for key in sorted(groups, key=lambda k: tuple(str(x) for x in k)):
        members = groups[key]
        agg = dict(zip(group_keys, key))
        agg["n"] = len(members)
        for mk in metrics_keys:
            values = np.array([m[mk] for m in members if m[mk] is not None], dtype=np.float64)
            if values.size == 0:
                agg[f"{mk}_mean"] = agg[f"{mk}_std"] = None
                continue
            agg[f"{mk}_mean"] = float(values.mean())
            agg[f"{mk}_std"] = float(values.std(ddof=1)) if values.size > 1 else 0.0
        out.append(agg)
    return out


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        raise ConfigurationError("empty report grid")
    keys = list(rows[0].keys())
    for row in rows:
        if list(row.keys()) != keys:
            raise ConfigurationError("inconsistent report rows")
    lines = [",".join(keys)]
    for row in rows:
        lines.append(",".join(_csv_cell(row[k]) for k in keys))
    return "\n".join(lines) + "\n"


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def config_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def write_report(outdir: str | Path, name: str, rows: list[dict],
                 meta: dict, group_keys: Sequence[str] | None = None) -> dict[str, Path]:
    """Normative CSV plus JSON with metadata and aggregates; deterministic bytes."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = {}
    csv_path = outdir / f"{name}_cells.csv"
    csv_path.write_text(rows_to_csv(rows), encoding="utf-8")
    paths["cells"] = csv_path
    aggregates = []
    if group_keys:
        aggregates = aggregate_rows(rows, group_keys)
        agg_path = outdir / f"{name}_aggregate.csv"
        agg_path.write_text(rows_to_csv(aggregates), encoding="utf-8")
        paths["aggregate"] = agg_path
    payload = {"meta": meta, "rows": rows, "aggregates": aggregates}
    json_path = outdir / f"{name}.json"
    json_path.write_text(json.dumps(payload, sort_keys=True, indent=1, default=str) + "\n",
                         encoding="utf-8")
    paths["json"] = json_path
    return paths

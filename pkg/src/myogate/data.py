"""Dataset layer: recordings, fixed-length windows, known/unknown split
plans, train-statistics normalization, a synthetic EMG generator, and the
canonical CSV format.

Canonical CSV: header ``subject,<id>,rate,<hz>,channels,<n>`` followed by one
row per sample ``t_index,ch1,...,chN,label``. UTF-8, LF endings, ``#`` lines
are ignored (converters may add provenance comments).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, ConfigurationError, DataError, ParseError
from .nn.rng import make_rng

logger = logging.getLogger(__name__)

REST_LABEL = 0
DEFAULT_FRACTIONS = (0.6, 0.15, 0.15, 0.1)  # cnn_train, cnn_val, cnn_test, gan_val


@dataclass(frozen=True)
class Recording:
    """One continuous multichannel recording with per-sample labels (0 = rest)."""

    subject_id: int
    sample_rate: float
    samples: np.ndarray  # channels x T
    labels: np.ndarray  # T

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float32)
        labels = np.asarray(self.labels, dtype=np.int32)
        if samples.ndim != 2:
            raise ArgumentError(f"samples must be channels x T, got shape {samples.shape}")
        if labels.shape != (samples.shape[1],):
            raise ArgumentError(
                f"labels length {labels.shape} does not match {samples.shape[1]} samples"
            )
        if self.sample_rate <= 0:
            raise ArgumentError(f"sample_rate must be positive, got {self.sample_rate}")
        if labels.size and labels.min() < 0:
            raise ArgumentError("labels must be non-negative integers")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "labels", labels)

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]


@dataclass(frozen=True)
class LabeledWindow:
    """A fixed-length segment: channels x sample-points matrix plus provenance."""

    matrix: np.ndarray
    class_label: int
    subject_id: int
    repetition_index: int

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=np.float32))


def segment_windows(
    recording: Recording,
    window_ms: float,
    stride_ms: float,
    label_mode: str = "uniform",
    rest_label: int = REST_LABEL,
) -> list[LabeledWindow]:
    """Cut windows at stride offsets.

    ``uniform`` keeps a window only when every sample carries the same
    non-rest label; ``majority`` labels the window by its most common
    non-rest label. Repetition indices count, per class, the contiguous
    activity bursts each window falls in (1-based).
    """
    if window_ms <= 0 or stride_ms <= 0:
        raise ArgumentError(f"window_ms and stride_ms must be positive, got {window_ms}, {stride_ms}")
    if label_mode not in ("uniform", "majority"):
        raise ArgumentError(f"unknown label_mode {label_mode!r}")
    w = int(round(window_ms * recording.sample_rate / 1000.0))
    s = int(round(stride_ms * recording.sample_rate / 1000.0))
    if w < 1 or s < 1:
        raise ArgumentError(f"window/stride shorter than one sample at rate {recording.sample_rate}")
    t = recording.n_samples
    if t < w:
        logger.warning(
            "recording of %d samples is shorter than one %d-sample window; no windows emitted", t, w
        )
        return []

    labels = recording.labels
    # repetition ordinal per sample: nth contiguous run of its class
    rep = np.zeros(t, dtype=np.int32)
    run_counts: dict[int, int] = {}
    prev = None
    for i, lab in enumerate(labels):
        lab = int(lab)
        if lab != rest_label:
            if lab != prev:
                run_counts[lab] = run_counts.get(lab, 0) + 1
            rep[i] = run_counts[lab]
        prev = lab

    windows = []
    for start in range(0, t - w + 1, s):
        seg_labels = labels[start:start + w]
        if label_mode == "uniform":
            first = int(seg_labels[0])
            if first == rest_label or not (seg_labels == first).all():
                continue
            label = first
            rep_index = int(rep[start])
        else:
            non_rest = seg_labels[seg_labels != rest_label]
            if non_rest.size == 0:
                continue
            values, counts = np.unique(non_rest, return_counts=True)
            label = int(values[np.argmax(counts)])
            first_idx = start + int(np.argmax(seg_labels == label))
            rep_index = int(rep[first_idx])
        windows.append(
            LabeledWindow(
                matrix=recording.samples[:, start:start + w].copy(),
                class_label=label,
                subject_id=recording.subject_id,
                repetition_index=rep_index,
            )
        )
    return windows


@dataclass(frozen=True)
class SplitPlan:
    """Window-index sets for the full training/evaluation layout.

    The four known-class destinations partition the known windows;
    ``openset_eval`` holds every unknown-class window plus a copy of the
    ``cnn_test`` indices, and shares nothing with the other three sets.
    """

    known_classes: tuple[int, ...]
    unknown_classes: tuple[int, ...]
    cnn_train: tuple[int, ...]
    cnn_val: tuple[int, ...]
    cnn_test: tuple[int, ...]
    gan_val: tuple[int, ...]
    openset_eval: tuple[int, ...]

    def save(self, path: str | Path) -> None:
        lines = []
        for name in ("known_classes", "unknown_classes", "cnn_train", "cnn_val",
                     "cnn_test", "gan_val", "openset_eval"):
            values = " ".join(str(v) for v in getattr(self, name))
            lines.append(f"{name} {values}".rstrip())
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "SplitPlan":
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"split file not found: {path}")
        fields: dict[str, tuple[int, ...]] = {}
        for line_no, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            if not raw.strip() or raw.startswith("#"):
                continue
            parts = raw.split()
            if parts[0] not in cls.__dataclass_fields__:
                raise ParseError(f"unknown split field {parts[0]!r}", line_no)
            try:
                fields[parts[0]] = tuple(int(v) for v in parts[1:])
            except ValueError as exc:
                raise ParseError(str(exc), line_no)
        missing = set(cls.__dataclass_fields__) - set(fields)
        if missing:
            raise ParseError(f"split file missing fields: {sorted(missing)}")
        return cls(**fields)


def make_split(
    windows: Sequence[LabeledWindow],
    known_classes: Sequence[int],
    unknown_classes: Sequence[int],
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
    seed: int = 0,
    val_repetitions: Sequence[int] | None = None,
) -> SplitPlan:
    """Assign window indices to the five split sets.

    Known-class windows are shuffled (seeded) and cut at the cumulative
    fraction boundaries. With ``val_repetitions`` set (the DB1 rule), known
    windows whose repetition index is listed go to ``cnn_test`` as the
    held-out evaluation group, and the fractions are renormalized over the
    remaining three destinations.
    """
    known = tuple(dict.fromkeys(int(c) for c in known_classes))
    unknown = tuple(dict.fromkeys(int(c) for c in unknown_classes))
    overlap = set(known) & set(unknown)
    if overlap:
        raise ConfigurationError(f"classes appear as both known and unknown: {sorted(overlap)}")
    if len(fractions) != 4:
        raise ConfigurationError(f"need 4 fractions (cnn_train,cnn_val,cnn_test,gan_val), got {len(fractions)}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigurationError(f"fractions must sum to 1, got {sum(fractions)}")

    present = {int(w.class_label) for w in windows}
    missing = [c for c in (*known, *unknown) if c not in present]
    if missing:
        raise ConfigurationError(f"requested classes absent from data: {missing}")

    known_idx = [i for i, w in enumerate(windows) if int(w.class_label) in known]
    unknown_idx = [i for i, w in enumerate(windows) if int(w.class_label) in unknown]

    rng = make_rng(seed, stream=101)

    if val_repetitions is not None:
        reps = set(int(r) for r in val_repetitions)
        test_idx = [i for i in known_idx if windows[i].repetition_index in reps]
        rest_idx = [i for i in known_idx if windows[i].repetition_index not in reps]
        rest_fracs = np.array([fractions[0], fractions[1], fractions[3]], dtype=np.float64)
        rest_fracs /= rest_fracs.sum()
        order = np.array(rest_idx)
        rng.shuffle(order)
        n = order.size
        b1 = int(round(rest_fracs[0] * n))
        b2 = int(round((rest_fracs[0] + rest_fracs[1]) * n))
        train, val, ganv = order[:b1], order[b1:b2], order[b2:]
        test = np.array(test_idx, dtype=int)
    else:
        order = np.array(known_idx)
        rng.shuffle(order)
        n = order.size
        cum = np.cumsum(fractions)
        b1 = int(round(cum[0] * n))
        b2 = int(round(cum[1] * n))
        b3 = int(round(cum[2] * n))
        train, val, test, ganv = order[:b1], order[b1:b2], order[b2:b3], order[b3:]

    openset = np.concatenate([np.array(unknown_idx, dtype=int), np.asarray(test, dtype=int)])
    return SplitPlan(
        known_classes=known,
        unknown_classes=unknown,
        cnn_train=tuple(sorted(int(i) for i in train)),
        cnn_val=tuple(sorted(int(i) for i in val)),
        cnn_test=tuple(sorted(int(i) for i in test)),
        gan_val=tuple(sorted(int(i) for i in ganv)),
        openset_eval=tuple(sorted(int(i) for i in openset)),
    )


@dataclass(frozen=True)
class NormStats:
    """Per-channel z-score statistics, always computed on cnn_train."""

    mean: np.ndarray
    std: np.ndarray

    def apply(self, window: LabeledWindow) -> LabeledWindow:
        matrix = (window.matrix - self.mean[:, None]) / self.std[:, None]
        return LabeledWindow(matrix.astype(np.float32), window.class_label,
                             window.subject_id, window.repetition_index)

    def apply_all(self, windows: Iterable[LabeledWindow]) -> list[LabeledWindow]:
        return [self.apply(w) for w in windows]

    def apply_matrix(self, matrix: np.ndarray) -> np.ndarray:
        return ((matrix - self.mean[:, None]) / self.std[:, None]).astype(np.float32)


SIGMA_FLOOR = 1e-8


def compute_norm_stats(train_windows: Sequence[LabeledWindow]) -> NormStats:
    if not train_windows:
        raise ArgumentError("cannot compute normalization statistics from an empty train set")
    stacked = np.concatenate([w.matrix for w in train_windows], axis=1).astype(np.float64)
    mean = stacked.mean(axis=1)
    std = stacked.std(axis=1)
    flat = std < SIGMA_FLOOR
    if flat.any():
        logger.warning("constant channel(s) %s: applying sigma floor %g", np.where(flat)[0].tolist(), SIGMA_FLOOR)
        std = np.where(flat, SIGMA_FLOOR, std)
    return NormStats(mean=mean.astype(np.float32), std=std.astype(np.float32))


def normalize(
    windows: Sequence[LabeledWindow], train_windows: Sequence[LabeledWindow]
) -> tuple[list[LabeledWindow], NormStats]:
    """Z-score ``windows`` using statistics from ``train_windows`` only."""
    stats = compute_norm_stats(train_windows)
    return stats.apply_all(windows), stats


@dataclass(frozen=True)
class SynthClassSpec:
    """Recipe for one synthetic gesture class.

    ``amplitudes`` scales the band-limited burst per channel; channels with
    zero amplitude carry only the noise floor, which is what makes classes
    separable by their per-channel RMS profile.
    """

    amplitudes: tuple[float, ...]
    band: tuple[float, float] = (20.0, 45.0)
    noise_floor: float = 0.05
    duty: float = 1.0

    def __post_init__(self):
        if any(a < 0 for a in self.amplitudes):
            raise ConfigurationError(f"amplitudes must be non-negative: {self.amplitudes}")
        if not 0.0 < self.duty <= 1.0:
            raise ConfigurationError(f"duty must be in (0, 1], got {self.duty}")


def make_class_profiles(
    n_known: int,
    n_unknown: int,
    channels: int,
    seed: int = 0,
    noise_floor: float = 0.05,
    band: tuple[float, float] = (20.0, 45.0),
    amplitude_jitter: float = 0.0,
) -> tuple[list[SynthClassSpec], list[SynthClassSpec]]:
    """Class recipes for open-set experiments.

    Known classes get distinct two-channel amplitude profiles (1.0 on a
    primary channel, 0.6 on a secondary). Unknown classes are weighted
    mixtures of two known profiles, so a classifier trained on the known set
    maps them to mid-confidence feature vectors instead of saturated ones --
    the regime an open-set gate has to handle. ``amplitude_jitter`` perturbs
    every profile multiplicatively (seeded), which is how synthetic
    "subjects" differ from each other.
    """
    pairs = [(a, b) for a in range(channels) for b in range(channels) if a != b]
    if n_known > len(pairs):
        raise ConfigurationError(
            f"{channels} channels support at most {len(pairs)} known classes, wanted {n_known}"
        )
    rng = make_rng(seed, stream=55)
    order = rng.permutation(len(pairs))
    profiles = []
    for k in range(n_known):
        a, b = pairs[order[k]]
        p = np.zeros(channels)
        p[a], p[b] = 1.0, 0.6
        profiles.append(p)

    mix_pairs = [(i, j) for i in range(n_known) for j in range(i + 1, n_known)]
    mix_weights = (0.5, 0.65, 0.35, 0.75, 0.25)
    if n_unknown > len(mix_pairs) * len(mix_weights):
        raise ConfigurationError(
            f"{n_known} known classes support at most {len(mix_pairs) * len(mix_weights)} "
            f"unknown mixtures, wanted {n_unknown}"
        )
    mix_order = rng.permutation(len(mix_pairs))
    unknown_profiles = []
    for u in range(n_unknown):
        i, j = mix_pairs[mix_order[u % len(mix_pairs)]]
        w = mix_weights[u // len(mix_pairs)]
        unknown_profiles.append(w * profiles[i] + (1.0 - w) * profiles[j])

    def to_spec(profile: np.ndarray) -> SynthClassSpec:
        if amplitude_jitter > 0.0:
            profile = profile * (1.0 + amplitude_jitter * rng.standard_normal(channels))
            profile = np.clip(profile, 0.0, None)
        return SynthClassSpec(amplitudes=tuple(float(v) for v in profile),
                              band=band, noise_floor=noise_floor)

    return [to_spec(p) for p in profiles], [to_spec(p) for p in unknown_profiles]


def _band_noise(rng: np.random.Generator, n: int, band: tuple[float, float], rate: float) -> np.ndarray:
    """Unit-RMS noise restricted to a frequency band via an rFFT mask."""
    white = rng.standard_normal(n)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, d=1.0 / rate)
    mask = (freqs >= band[0]) & (freqs <= band[1])
    spectrum[~mask] = 0.0
    shaped = np.fft.irfft(spectrum, n=n)
    scale = shaped.std()
    return shaped / max(scale, 1e-12)


def _synth_window(spec: SynthClassSpec, channels: int, n: int, rate: float,
                  rng: np.random.Generator) -> np.ndarray:
    active = int(round(spec.duty * n))
    envelope = np.zeros(n)
    envelope[:active] = 1.0
    matrix = np.empty((channels, n), dtype=np.float64)
    for ch in range(channels):
        carrier = _band_noise(rng, n, spec.band, rate)
        noise = rng.standard_normal(n) * spec.noise_floor
        matrix[ch] = spec.amplitudes[ch] * envelope * carrier + noise
    return matrix.astype(np.float32)


def _check_synth_args(specs, channels, sample_rate):
    if len(specs) < 2:
        raise ConfigurationError(f"need at least 2 class specs, got {len(specs)}")
    for k, spec in enumerate(specs):
        if len(spec.amplitudes) != channels:
            raise ConfigurationError(
                f"spec {k} has {len(spec.amplitudes)} amplitudes for {channels} channels"
            )
        if spec.band[1] > sample_rate / 2.0 or spec.band[0] >= spec.band[1]:
            raise ConfigurationError(
                f"spec {k} band {spec.band} invalid for Nyquist {sample_rate / 2.0}"
            )


def synth_generate(
    specs: Sequence[SynthClassSpec],
    windows_per_class: int,
    channels: int,
    sample_rate: float,
    seed: int = 0,
    window_ms: float = 200.0,
    subject_id: int = 0,
) -> list[LabeledWindow]:
    """Generate labeled windows directly; class labels are 1..len(specs)."""
    _check_synth_args(specs, channels, sample_rate)
    n = int(round(window_ms * sample_rate / 1000.0))
    windows = []
    for c, spec in enumerate(specs):
        label = c + 1
        for k in range(windows_per_class):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(subject_id, label, k)))
            windows.append(LabeledWindow(_synth_window(spec, channels, n, sample_rate, rng),
                                         label, subject_id, k + 1))
    return windows


def synth_recording(
    specs: Sequence[SynthClassSpec],
    windows_per_class: int,
    channels: int,
    sample_rate: float,
    seed: int = 0,
    window_ms: float = 200.0,
    subject_id: int = 0,
) -> Recording:
    """Materialize the same windows as a continuous recording.

    Bursts are placed at even window multiples with rest gaps between them,
    so re-segmenting at (window_ms, stride=window_ms) recovers exactly the
    ``synth_generate`` windows.
    """
    windows = synth_generate(specs, windows_per_class, channels, sample_rate,
                             seed, window_ms, subject_id)
    n = int(round(window_ms * sample_rate / 1000.0))
    total = 2 * len(windows) * n
    samples = np.zeros((channels, total), dtype=np.float32)
    labels = np.zeros(total, dtype=np.int32)
    for i, w in enumerate(windows):
        start = 2 * i * n
        samples[:, start:start + n] = w.matrix
        labels[start:start + n] = w.class_label
    return Recording(subject_id=subject_id, sample_rate=sample_rate, samples=samples, labels=labels)


def _format_value(v: np.float32) -> str:
    return np.format_float_positional(np.float32(v), unique=True, trim="0")


def save_canonical(recording: Recording, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rate = recording.sample_rate
    rate_str = str(int(rate)) if float(rate).is_integer() else repr(float(rate))
    lines = [f"subject,{recording.subject_id},rate,{rate_str},channels,{recording.channels}"]
    for t in range(recording.n_samples):
        cells = [_format_value(v) for v in recording.samples[:, t]]
        lines.append(f"{t},{','.join(cells)},{int(recording.labels[t])}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_canonical(path: str | Path) -> Recording:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"dataset file not found: {path}")
    subject = rate = channels = None
    columns: list[list[np.float32]] = []
    labels: list[int] = []
    expected_t = 0
    with path.open(encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cells = line.split(",")
            if subject is None:
                if len(cells) != 6 or cells[0] != "subject" or cells[2] != "rate" or cells[4] != "channels":
                    raise ParseError(f"malformed header {line!r}", line_no)
                try:
                    subject, rate, channels = int(cells[1]), float(cells[3]), int(cells[5])
                except ValueError as exc:
                    raise ParseError(str(exc), line_no)
                continue
            if len(cells) != channels + 2:
                raise ParseError(
                    f"expected {channels + 2} columns for {channels} channels, got {len(cells)}", line_no
                )
            try:
                t_index = int(cells[0])
                values = [np.float32(c) for c in cells[1:-1]]
                label = int(cells[-1])
            except ValueError as exc:
                raise ParseError(f"non-numeric cell: {exc}", line_no)
            if t_index != expected_t:
                raise ParseError(f"t_index {t_index} out of order (expected {expected_t})", line_no)
            expected_t += 1
            columns.append(values)
            labels.append(label)
    if subject is None:
        raise ParseError("empty dataset file", 1)
    samples = np.array(columns, dtype=np.float32).T if columns else np.zeros((channels, 0), np.float32)
    return Recording(subject_id=subject, sample_rate=rate, samples=samples,
                     labels=np.array(labels, dtype=np.int32))

"""Pre-execution accept/reject gate.

A window is classified by the CNN, its feature vector is scored by the
selected discriminator, and the action executes only when the score reaches
the calibrated threshold. Rejected windows leave the stream in its default
or previous state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .classifier import CnnModel, extract_features
from .data import LabeledWindow
from .errors import ConfigurationError
from .metrics import Outcome
from .opengan import SelectedDiscriminator, score_features

DEFAULT_ACTION: int | None = None  # rest; no gesture executed yet


@dataclass(frozen=True)
class Decision:
    accepted: bool
    predicted_class: int | None  # original class id when accepted
    score: float
    features: np.ndarray


@dataclass
class GatePipeline:
    cnn: CnnModel
    discriminator: SelectedDiscriminator

    def __post_init__(self):
        disc_width = self.discriminator.network.layers[0].in_features
        if disc_width != self.cnn.config.n_known:
            raise ConfigurationError(
                f"discriminator input width {disc_width} does not match "
                f"classifier output width {self.cnn.config.n_known}"
            )

    @property
    def tau(self) -> float:
        return self.discriminator.tau


@dataclass
class StreamState:
    current_action: int | None = DEFAULT_ACTION
    log: list[Decision] = field(default_factory=list)
    action_timeline: list[int | None] = field(default_factory=list)


def decide(pipeline: GatePipeline, window: LabeledWindow) -> Decision:
    """Accept(argmax class) iff discriminator score >= tau, else Reject."""
    return decide_batch(pipeline, [window])[0]


def decide_batch(pipeline: GatePipeline, windows: Sequence[LabeledWindow]) -> list[Decision]:
    features = extract_features(pipeline.cnn, windows)
    matrix = np.stack([f.values for f in features])
    scores = score_features(pipeline.discriminator.network, matrix)
    decisions = []
    for f, score in zip(features, scores):
        accepted = bool(score >= pipeline.tau)
        predicted = int(pipeline.cnn.class_ids[int(np.argmax(f.values))]) if accepted else None
        decisions.append(Decision(accepted, predicted, float(score), f.values))
    return decisions


def run_stream(
    pipeline: GatePipeline,
    windows: Sequence[LabeledWindow],
    initial: int | None = DEFAULT_ACTION,
) -> tuple[StreamState, list[Outcome]]:
    """Feed windows in arrival order; rejections hold the previous action."""
    state = StreamState(current_action=initial)
    outcomes = []
    known = set(pipeline.cnn.class_ids)
    if windows:
        for window, decision in zip(windows, decide_batch(pipeline, windows)):
            if decision.accepted:
                state.current_action = decision.predicted_class
            state.log.append(decision)
            state.action_timeline.append(state.current_action)
            outcomes.append(Outcome(
                true_class=int(window.class_label),
                true_is_known=int(window.class_label) in known,
                predicted_class=decision.predicted_class,
            ))
    return state, outcomes


def export_decision_log(
    path: str | Path,
    windows: Sequence[LabeledWindow],
    state: StreamState,
    known_classes: Sequence[int],
) -> None:
    known = set(int(c) for c in known_classes)
    lines = ["index,true_class,known_flag,score,decision,executed_action"]
    for i, (w, d, action) in enumerate(zip(windows, state.log, state.action_timeline)):
        decision = f"accept:{d.predicted_class}" if d.accepted else "reject"
        executed = "default" if action is None else str(action)
        lines.append(f"{i},{w.class_label},{int(int(w.class_label) in known)},"
                     f"{d.score:.6f},{decision},{executed}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

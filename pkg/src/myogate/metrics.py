"""ROC/AUC, optimal-cutoff selection, and the gated-control metrics
(AER, ACC, ARR, F1) computed from accept/reject outcomes."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ArgumentError, NoAcceptedActions


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    fpr: float
    tpr: float


@dataclass(frozen=True)
class Outcome:
    """One gated decision: what the true class was and what got executed.

    ``predicted_class`` is None when the sample was rejected.
    """

    true_class: int
    true_is_known: bool
    predicted_class: int | None


@dataclass
class MetricsReport:
    mode: str
    aer: float
    acc: float
    arr: float
    f1: float
    auc: float | None
    n_accepted: int
    n_rejected: int
    n_correct: int
    n_wrong: int

    CSV_HEADER = "mode,aer,acc,arr,f1,auc,n_accepted,n_rejected,n_correct,n_wrong"

    def csv_row(self) -> str:
        auc = "" if self.auc is None else f"{self.auc:.6f}"
        return (
            f"{self.mode},{self.aer:.6f},{self.acc:.6f},{self.arr:.6f},"
            f"{self.f1:.6f},{auc},{self.n_accepted},{self.n_rejected},"
            f"{self.n_correct},{self.n_wrong}"
        )

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _split_scores(scores: Sequence[tuple[float, int]]):
    pos = np.array([s for s, label in scores if label], dtype=np.float64)
    neg = np.array([s for s, label in scores if not label], dtype=np.float64)
    if pos.size == 0:
        raise ArgumentError("roc needs at least one positive sample; got none")
    if neg.size == 0:
        raise ArgumentError("roc needs at least one negative sample; got none")
    return pos, neg


def roc_curve(scores: Sequence[tuple[float, int]]) -> list[RocPoint]:
    """ROC points at every distinct score plus a sentinel above the maximum.

    A sample is classified positive iff its score >= the threshold, so the
    sentinel point is (fpr=0, tpr=0) and the minimum score gives (1, 1).
    """
    pos, neg = _split_scores(scores)
    thresholds = np.unique(np.concatenate([pos, neg]))[::-1]
    sentinel = thresholds[0] + 1.0
    points = [RocPoint(float(sentinel), 0.0, 0.0)]
    for t in thresholds:
        tpr = float(np.count_nonzero(pos >= t)) / pos.size
        fpr = float(np.count_nonzero(neg >= t)) / neg.size
        points.append(RocPoint(float(t), fpr, tpr))
    return points


def auc(scores: Sequence[tuple[float, int]]) -> float:
    """Probability a random positive outscores a random negative (ties 0.5).

    Computed with midranks, which is the pair-count value exactly.
    """
    pos, neg = _split_scores(scores)
    combined = np.concatenate([pos, neg])
    order = np.argsort(combined, kind="mergesort")
    ranks = np.empty(combined.size, dtype=np.float64)
    sorted_vals = combined[order]
    i = 0
    while i < combined.size:
        j = i
        while j + 1 < combined.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i:j + 1]] = 0.5 * (i + j) + 1.0  # midrank, 1-based
        i = j + 1
    rank_sum_pos = ranks[: pos.size].sum()
    u = rank_sum_pos - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


def trapezoid_auc(points: Iterable[RocPoint]) -> float:
    """Area under the ROC staircase by trapezoidal integration."""
    pts = sorted(points, key=lambda p: (p.fpr, p.tpr))
    area = 0.0
    for a, b in zip(pts, pts[1:]):
        area += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0
    return area


def optimal_cutoff(points: Sequence[RocPoint]) -> float:
    """Threshold of the point nearest (fpr=0, tpr=1); ties go to the larger threshold."""
    if not points:
        raise ArgumentError("empty roc curve")
    best = None
    best_d2 = None
    for p in points:
        d2 = p.fpr * p.fpr + (1.0 - p.tpr) * (1.0 - p.tpr)
        if best_d2 is None or d2 < best_d2 or (d2 == best_d2 and p.threshold > best):
            best_d2 = d2
            best = p.threshold
    return best


def f1_from_counts(tp: int, fp: int, fn: int) -> float:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def compute_report(
    outcomes: Sequence[Outcome],
    closed_set_accuracy: float,
    mode: str,
    auc_value: float | None = None,
) -> MetricsReport:
    """AER over executed actions, ACC = 1 - AER, ARR against the closed-set
    reference, and F1 of the accept/reject task with known as the positive class."""
    if not outcomes:
        raise ArgumentError("no outcomes to score")
    if closed_set_accuracy == 0.0:
        raise ArgumentError("closed-set reference accuracy must be nonzero")
    accepted = [o for o in outcomes if o.predicted_class is not None]
    if not accepted:
        raise NoAcceptedActions("no accepted actions; AER undefined")
    wrong = sum(1 for o in accepted if not o.true_is_known or o.predicted_class != o.true_class)
    aer = wrong / len(accepted)
    acc = 1.0 - aer
    tp = sum(1 for o in accepted if o.true_is_known)
    fp = len(accepted) - tp
    fn = sum(1 for o in outcomes if o.predicted_class is None and o.true_is_known)
    return MetricsReport(
        mode=mode,
        aer=aer,
        acc=acc,
        arr=acc / closed_set_accuracy,
        f1=f1_from_counts(tp, fp, fn),
        auc=auc_value,
        n_accepted=len(accepted),
        n_rejected=len(outcomes) - len(accepted),
        n_correct=len(accepted) - wrong,
        n_wrong=wrong,
    )


def roc_to_csv(points: Iterable[RocPoint]) -> str:
    """Two-column plotting export, one (fpr, tpr) row per operating point."""
    lines = ["fpr,tpr"]
    lines += [f"{p.fpr:.9f},{p.tpr:.9f}" for p in points]
    return "\n".join(lines) + "\n"

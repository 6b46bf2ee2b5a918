"""Macro-averaged multiclass metrics over the 3-label scheme.

Conventions: precision and recall with a zero denominator are defined as
0; balanced accuracy is the macro recall; ROC AUC is one-vs-rest, computed
per class as the fraction of (positive, negative) pairs ranked correctly
with ties credited 0.5, then macro-averaged over the classes present.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Sequence, Union

import numpy as np

from .errors import EmptyInput, LengthMismatch, SingleClassOnly

N_CLASSES = 3

ProbsLike = Union[np.ndarray, Sequence]  # (n, 3) array or sequence of ProbTriple


def _as_prob_array(probs: ProbsLike) -> np.ndarray:
    arr = np.asarray(
        [p.as_tuple() if hasattr(p, "as_tuple") else p for p in probs], dtype=float
    )
    if arr.ndim != 2 or arr.shape[1] != N_CLASSES:
        raise ValueError(f"expected an (n, {N_CLASSES}) probability array, got shape {arr.shape}")
    return arr


def confusion(y_true: Sequence[int], y_pred: Sequence[int]) -> np.ndarray:
    """3x3 count matrix; rows are true classes, columns predicted classes."""
    yt = np.asarray(y_true, dtype=np.int64)
    yp = np.asarray(y_pred, dtype=np.int64)
    if yt.shape != yp.shape:
        raise LengthMismatch(f"y_true has {yt.size} labels, y_pred has {yp.size}")
    if yt.size == 0:
        raise EmptyInput("cannot build a confusion matrix from zero examples")
    if yt.min() < 0 or yt.max() >= N_CLASSES or yp.min() < 0 or yp.max() >= N_CLASSES:
        raise ValueError(f"labels must lie in [0, {N_CLASSES})")
    cm = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    np.add.at(cm, (yt, yp), 1)
    return cm


def macro_prf(cm: np.ndarray) -> tuple[float, float, float, float]:
    """(precision_macro, recall_macro, f1_macro, balanced_accuracy) from counts."""
    cm = np.asarray(cm)
    if cm.sum() == 0:
        raise EmptyInput("confusion matrix is empty")
    precisions, recalls, f1s = [], [], []
    for c in range(N_CLASSES):
        tp = float(cm[c, c])
        fp = float(cm[:, c].sum() - cm[c, c])
        fn = float(cm[c, :].sum() - cm[c, c])
        p = tp / (tp + fp) if tp + fp > 0 else 0.0
        r = tp / (tp + fn) if tp + fn > 0 else 0.0
        f = 2.0 * p * r / (p + r) if p + r > 0 else 0.0
        precisions.append(p)
        recalls.append(r)
        f1s.append(f)
    precision_macro = sum(precisions) / N_CLASSES
    recall_macro = sum(recalls) / N_CLASSES
    f1_macro = sum(f1s) / N_CLASSES
    return precision_macro, recall_macro, f1_macro, recall_macro


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """1-based ranks with ties replaced by the mean rank of their group."""
    n = scores.size
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    boundaries = np.flatnonzero(np.r_[True, sorted_scores[1:] != sorted_scores[:-1]])
    group_sizes = np.diff(np.r_[boundaries, n])
    group_mean_rank = boundaries + 1 + (group_sizes - 1) / 2.0
    ranks = np.empty(n, dtype=float)
    ranks[order] = np.repeat(group_mean_rank, group_sizes)
    return ranks


def binary_auc(scores: Sequence[float], positives: Sequence[bool]) -> float:
    """Probability a random positive outranks a random negative (ties 0.5).

    Computed through average ranks, which is exactly the pairwise count
    with half credit for ties.
    """
    s = np.asarray(scores, dtype=float)
    pos = np.asarray(positives, dtype=bool)
    n_pos = int(pos.sum())
    n_neg = int(s.size - n_pos)
    if n_pos == 0 or n_neg == 0:
        raise SingleClassOnly("AUC needs at least one positive and one negative")
    ranks = _average_ranks(s)
    pos_rank_sum = float(ranks[pos].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def roc_auc_ovr_macro(y_true: Sequence[int], probs: ProbsLike) -> float:
    """Macro mean of per-class one-vs-rest AUC over the classes present."""
    yt = np.asarray(y_true, dtype=np.int64)
    arr = _as_prob_array(probs)
    if yt.size != arr.shape[0]:
        raise LengthMismatch(f"{yt.size} labels but {arr.shape[0]} probability rows")
    present = np.unique(yt)
    if present.size < 2:
        raise SingleClassOnly("need at least two distinct labels for ROC AUC")
    aucs = [binary_auc(arr[:, c], yt == c) for c in present]
    return float(sum(aucs) / len(aucs))


@dataclass(frozen=True)
class MetricBundle:
    """The metric row reported for one evaluation at one threshold."""

    roc_auc_macro_ovr: float
    recall_macro: float
    precision_macro: float
    balanced_accuracy: float
    f1_macro: float
    accuracy: float
    threshold_used: float

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def metric_bundle(
    y_true: Sequence[int],
    probs: ProbsLike,
    y_pred: Sequence[int],
    threshold_used: float,
) -> MetricBundle:
    """Assemble the full metric row from labels, scores and decided classes."""
    cm = confusion(y_true, y_pred)
    precision, recall, f1, balanced = macro_prf(cm)
    accuracy = float(np.trace(cm) / cm.sum())
    return MetricBundle(
        roc_auc_macro_ovr=roc_auc_ovr_macro(y_true, probs),
        recall_macro=recall,
        precision_macro=precision,
        balanced_accuracy=balanced,
        f1_macro=f1,
        accuracy=accuracy,
        threshold_used=threshold_used,
    )


def mean_bundle(bundles: Sequence[MetricBundle]) -> MetricBundle:
    """Field-wise arithmetic mean of metric rows."""
    if not bundles:
        raise EmptyInput("no metric bundles to average")
    values = {
        f.name: sum(getattr(b, f.name) for b in bundles) / len(bundles)
        for f in fields(MetricBundle)
    }
    return MetricBundle(**values)

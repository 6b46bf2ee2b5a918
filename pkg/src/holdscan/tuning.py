"""Cross-validation protocol, shared threshold selection and sweep harness.

One fold is reserved for testing. Each remaining fold serves once as the
validation fold for a model trained on all the others; the best epoch
checkpoint per fold is picked by validation ROC AUC. A single threshold is
then chosen for every checkpoint at once: candidates are all unique
p1 + p2 sums observed across the concatenated validation predictions
(plus a reject-all sentinel), scored by the mean validation F1-macro over
folds. Finally every per-fold checkpoint predicts the test fold at that
shared threshold and the reported test metrics are the per-fold mean.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .classifier import (
    Checkpoint,
    FeatureSpec,
    ProbTriple,
    TrainConfig,
    predict_proba,
    select_best_checkpoint,
    train,
)
from .corpus.model import Corpus, FoldPlan
from .decision import REJECT_ALL_THRESHOLD, DecisionRule, decide_batch
from .errors import EmptyFold, FoldTooSmall, UnknownAxis
from .metrics import MetricBundle, macro_prf, mean_bundle, metric_bundle

FoldPredictions = tuple[Sequence[ProbTriple], Sequence[int]]

# Default hyperparameter grids for the two supported sweep axes.
DEFAULT_CLASS_WEIGHT_GRID: tuple[tuple[float, float, float], ...] = (
    (0.005, 1.0, 1.0),
    (0.01, 1.0, 1.0),
    (0.02, 1.0, 1.0),
    (0.05, 1.0, 1.0),
    (0.075, 1.0, 1.0),
    (0.1, 1.0, 1.0),
    (1.0, 1.0, 1.0),
)
DEFAULT_LEARNING_RATE_GRID: tuple[float, ...] = (5e-7, 1e-6, 3e-6, 5e-6)

SWEEP_AXES = ("class_weights", "learning_rate")


def shared_threshold_search(
    per_fold_predictions: Sequence[FoldPredictions],
) -> tuple[float, float]:
    """Pick one threshold maximizing mean per-fold F1-macro.

    Candidates are the unique p1 + p2 values over all folds plus the
    reject-all sentinel; ties resolve to the smallest threshold. Returns
    (threshold, mean F1-macro at that threshold).
    """
    if not per_fold_predictions:
        raise EmptyFold("need at least one fold of predictions")
    folds = []
    for probs, labels in per_fold_predictions:
        if len(probs) == 0:
            raise EmptyFold("a fold with zero predictions cannot be scored")
        if len(probs) != len(labels):
            raise EmptyFold(f"{len(probs)} predictions but {len(labels)} labels in a fold")
        s = np.array([p.p1 + p.p2 for p in probs])
        winner = np.array([1 if p.p1 >= p.p2 else 2 for p in probs])
        folds.append((s, winner, np.asarray(labels, dtype=np.int64)))

    all_sums = np.concatenate([s for s, _, _ in folds])
    # Descending sweep: start from the sentinel (everything rejected) and
    # flip predictions to their positive winner as the threshold drops.
    candidates_desc = np.unique(all_sums)[::-1]
    n_cand = candidates_desc.size + 1  # sentinel first

    f1_sum = np.zeros(n_cand)
    for s, winner, y in folds:
        order = np.argsort(-s, kind="mergesort")
        cm = np.zeros((3, 3), dtype=np.int64)
        np.add.at(cm, (y, np.zeros_like(y)), 1)
        f1_sum[0] += macro_prf(cm)[2]
        ptr = 0
        for ci, cand in enumerate(candidates_desc, start=1):
            while ptr < s.size and s[order[ptr]] >= cand:
                i = order[ptr]
                cm[y[i], 0] -= 1
                cm[y[i], winner[i]] += 1
                ptr += 1
            f1_sum[ci] += macro_prf(cm)[2]

    mean_f1 = f1_sum / len(folds)
    thresholds = np.r_[REJECT_ALL_THRESHOLD, candidates_desc]
    best_f1 = mean_f1.max()
    winners = thresholds[mean_f1 == best_f1]
    return float(winners.min()), float(best_f1)


@dataclass
class FoldResult:
    """Outcome of one validation fold inside a cross-validation run."""

    fold_index: int
    checkpoint: Checkpoint
    val_probs: list[ProbTriple]
    val_labels: list[int]
    test_bundle: MetricBundle | None = None


@dataclass
class CvRun:
    fold_plan: FoldPlan
    folds: list[FoldResult]
    shared_threshold: float
    shared_threshold_mean_f1: float
    test_bundles: list[MetricBundle]
    mean_test_bundle: MetricBundle


def run_cross_validation(
    corpus: Corpus,
    fold_plan: FoldPlan,
    train_config: TrainConfig,
    feature_spec: FeatureSpec,
) -> CvRun:
    """Execute the full train / select / shared-threshold / test protocol.

    The test fold influences nothing upstream: models see only the other
    folds and the threshold is chosen on validation predictions alone.
    Per-fold training seeds are train_config.seed + fold_index, so fold
    jobs are reproducible independently of execution order.
    """
    if fold_plan.k < 3:
        raise FoldTooSmall(f"k={fold_plan.k}: need separate train, validation and test folds")
    fold_plan.validate_against(corpus)

    keys_by_fold = fold_plan.keys_by_fold()
    texts_labels = {
        key: (corpus.turn(key).text, corpus.turn(key).label) for key in fold_plan.assignment
    }
    test_fold = fold_plan.test_fold
    val_folds = [f for f in range(fold_plan.k) if f != test_fold]

    results: list[FoldResult] = []
    for v in val_folds:
        train_keys = [
            key
            for f in val_folds
            if f != v
            for key in keys_by_fold[f]
        ]
        train_examples = [texts_labels[key] for key in train_keys]
        val_examples = [texts_labels[key] for key in keys_by_fold[v]]
        config = replace(train_config, seed=train_config.seed + v)
        checkpoints = train(train_examples, config, feature_spec, val_examples)
        best = select_best_checkpoint(checkpoints)
        val_probs = predict_proba(best, [t for t, _ in val_examples], feature_spec)
        results.append(
            FoldResult(
                fold_index=v,
                checkpoint=best,
                val_probs=val_probs,
                val_labels=[label for _, label in val_examples],
            )
        )

    threshold, mean_f1 = shared_threshold_search(
        [(r.val_probs, r.val_labels) for r in results]
    )

    rule = DecisionRule(threshold)
    test_keys = keys_by_fold[test_fold]
    test_texts = [texts_labels[key][0] for key in test_keys]
    test_labels = [texts_labels[key][1] for key in test_keys]
    test_bundles: list[MetricBundle] = []
    for result in results:
        probs = predict_proba(result.checkpoint, test_texts, feature_spec)
        y_pred = decide_batch(probs, rule)
        bundle = metric_bundle(test_labels, probs, y_pred, threshold)
        result.test_bundle = bundle
        test_bundles.append(bundle)

    return CvRun(
        fold_plan=fold_plan,
        folds=results,
        shared_threshold=threshold,
        shared_threshold_mean_f1=mean_f1,
        test_bundles=test_bundles,
        mean_test_bundle=mean_bundle(test_bundles),
    )


@dataclass
class SweepResult:
    axis: str
    values: list
    bundles: list[MetricBundle]
    best_index: int

    def rows(self) -> list[tuple[object, MetricBundle]]:
        return list(zip(self.values, self.bundles))


def sweep(
    corpus: Corpus,
    fold_plan: FoldPlan,
    base_config: TrainConfig,
    axis: str,
    values: Sequence,
    feature_spec: FeatureSpec | None = None,
) -> SweepResult:
    """One cross-validation run per grid value along a single axis.

    The best row is the one with the highest mean test F1-macro (first on
    ties).
    """
    if axis not in SWEEP_AXES:
        raise UnknownAxis(axis)
    if not values:
        raise ValueError("sweep needs at least one grid value")
    spec = feature_spec if feature_spec is not None else FeatureSpec()

    bundles: list[MetricBundle] = []
    for value in values:
        if axis == "class_weights":
            config = replace(base_config, class_weights=tuple(value))
        else:
            config = replace(base_config, learning_rate=float(value))
        run = run_cross_validation(corpus, fold_plan, config, spec)
        bundles.append(run.mean_test_bundle)

    best_index = max(range(len(bundles)), key=lambda i: (bundles[i].f1_macro, -i))
    return SweepResult(axis=axis, values=list(values), bundles=bundles, best_index=best_index)

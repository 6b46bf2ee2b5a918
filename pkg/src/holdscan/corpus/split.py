"""Stratified assignment of labeled turns to cross-validation folds.

Row mode shuffles each class independently and deals near-equal chunks to
the folds, so per-fold class counts are always floor(total/k) or
ceil(total/k). Call-grouped mode keeps every turn of a call in one fold
and balances class proportions greedily.
"""

from __future__ import annotations

import numpy as np

from ..errors import ClassTooSmall, SplitInfeasible, Unlabeled
from .model import Corpus, FoldPlan, TurnKey

# Relative deviation of per-fold class proportions tolerated in
# call_grouped mode before the split is declared infeasible.
CALL_GROUPED_TOLERANCE = 0.20


def stratified_split(
    corpus: Corpus,
    k: int,
    seed: int,
    mode: str = "row",
    test_fold: int = 0,
) -> FoldPlan:
    """Split all labeled turns of the corpus into k stratified folds.

    mode "row" spreads every class evenly across folds (counts differ by at
    most one); mode "call_grouped" never splits a call across folds and
    keeps per-fold class proportions within a relative tolerance of the
    global proportions. Raises ClassTooSmall when a class cannot reach
    every fold, Unlabeled when a turn has no label.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if mode not in ("row", "call_grouped"):
        raise ValueError(f"mode must be 'row' or 'call_grouped', got {mode!r}")
    for turn in corpus.iter_turns():
        if turn.label is None:
            raise Unlabeled(f"turn {turn.key} has no label; splitting requires a labeled corpus")

    if mode == "row":
        assignment = _split_rows(corpus, k, seed)
    else:
        assignment = _split_calls(corpus, k, seed)

    plan = FoldPlan(k=k, assignment=assignment, test_fold=test_fold)
    plan.validate_against(corpus)
    return plan


def _split_rows(corpus: Corpus, k: int, seed: int) -> dict[TurnKey, int]:
    rng = np.random.default_rng(seed)
    by_class: dict[int, list[TurnKey]] = {}
    for key in corpus.labeled_keys():
        by_class.setdefault(corpus.turn(key).label, []).append(key)

    for label, keys in sorted(by_class.items()):
        if len(keys) < k:
            raise ClassTooSmall(label, len(keys), k)

    assignment: dict[TurnKey, int] = {}
    for label, keys in sorted(by_class.items()):
        order = rng.permutation(len(keys))
        shuffled = [keys[int(i)] for i in order]
        # Deal chunk sizes floor or floor+1; which folds get the extra row
        # is itself randomized so fold 0 carries no systematic surplus.
        base, extra = divmod(len(keys), k)
        lucky = rng.permutation(k)[:extra]
        sizes = [base + (1 if f in lucky else 0) for f in range(k)]
        pos = 0
        for fold, size in enumerate(sizes):
            for key in shuffled[pos : pos + size]:
                assignment[key] = fold
            pos += size
    return assignment


def _split_calls(corpus: Corpus, k: int, seed: int) -> dict[TurnKey, int]:
    rng = np.random.default_rng(seed)
    calls = list(corpus.calls)
    if len(calls) < k:
        raise SplitInfeasible(f"cannot spread {len(calls)} calls over {k} folds")

    def class_vector(call) -> np.ndarray:
        v = np.zeros(3)
        for t in call.turns:
            v[t.label] += 1
        return v

    vectors = {c.call_id: class_vector(c) for c in calls}
    totals = sum(vectors.values())
    # Absent classes are fine; avoid dividing by zero in the target.
    safe_totals = np.where(totals == 0, 1.0, totals)

    # Seeded shuffle breaks ties between equal-profile calls, then calls
    # heavy in rare classes are placed first while folds are still empty.
    order = rng.permutation(len(calls))
    calls = [calls[int(i)] for i in order]
    calls.sort(key=lambda c: (-vectors[c.call_id][2], -vectors[c.call_id][1], -len(c.turns)))

    fold_counts = np.zeros((k, 3))
    target = safe_totals / k
    assignment: dict[TurnKey, int] = {}
    for call in calls:
        v = vectors[call.call_id]
        # Squared relative overshoot against the per-fold target; the fold
        # that stays closest to proportional wins.
        costs = (((fold_counts + v) / target) ** 2).sum(axis=1)
        fold = int(np.argmin(costs))
        fold_counts[fold] += v
        for t in call.turns:
            assignment[t.key] = fold

    _check_call_grouped_balance(fold_counts, totals)
    return assignment


def _check_call_grouped_balance(fold_counts: np.ndarray, totals: np.ndarray) -> None:
    grand = fold_counts.sum()
    global_prop = totals / grand
    for fold, counts in enumerate(fold_counts):
        fold_total = counts.sum()
        if fold_total == 0:
            raise SplitInfeasible(f"fold {fold} received no turns")
        for label in range(3):
            if totals[label] <= 0 or global_prop[label] == 0:
                continue
            prop = counts[label] / fold_total
            rel = abs(prop - global_prop[label]) / global_prop[label]
            if rel > CALL_GROUPED_TOLERANCE:
                raise SplitInfeasible(
                    f"fold {fold} class {label} proportion {prop:.4f} deviates "
                    f"{rel:.0%} from global {global_prop[label]:.4f}"
                )

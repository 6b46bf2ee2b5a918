"""Hold-compliance audit: match detected script phrases to registered holds.

For every registered hold we look for an opening phrase ending shortly
before the hold starts and a closing phrase starting shortly after it
ends. Matching is one-to-one and greedy in time order, which for the
uniform windows used here yields a maximum matching, so widening the
windows can only reduce the violation count. Script phrases that match no
hold are flagged: the agent asked the client to wait without logging a
hold.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

from .corpus.model import Call, Corpus, HoldInterval, TurnKey
from .errors import LabelCountMismatch, MissingPredictions
from .violations import (
    MISSING_CLOSING,
    MISSING_OPENING,
    UNREGISTERED_HOLD,
    VIOLATION_KINDS,
    Violation,
)


@dataclass(frozen=True)
class AuditConfig:
    """Matching windows, all in milliseconds.

    An opening phrase matches a hold when its end falls within
    [start - pre_window_ms, start + grace_ms]; a closing phrase matches
    when its start falls within [end - grace_ms, end + post_window_ms].
    """

    pre_window_ms: int = 15000
    post_window_ms: int = 15000
    grace_ms: int = 2000

    def __post_init__(self):
        if self.pre_window_ms < 0 or self.post_window_ms < 0 or self.grace_ms < 0:
            raise ValueError("audit windows must be non-negative")


@dataclass(frozen=True)
class HoldVerdict:
    hold: HoldInterval
    opening_ok: bool
    opening_turn_index: Optional[int]
    closing_ok: bool
    closing_turn_index: Optional[int]


@dataclass
class ComplianceReport:
    call_id: str
    verdicts: list[HoldVerdict]
    unregistered: list[tuple[int, int]]  # (turn_index, predicted class)

    def violations(self) -> list[Violation]:
        out: list[Violation] = []
        for v in self.verdicts:
            if not v.opening_ok:
                out.append(
                    Violation(self.call_id, MISSING_OPENING, v.hold.hold_start_ms, v.hold.hold_end_ms)
                )
            if not v.closing_ok:
                out.append(
                    Violation(self.call_id, MISSING_CLOSING, v.hold.hold_start_ms, v.hold.hold_end_ms)
                )
        for turn_index, _ in self.unregistered:
            out.append(Violation(self.call_id, UNREGISTERED_HOLD, turn_index=turn_index))
        return out


def _greedy_match(
    holds: Sequence[HoldInterval],
    candidates: list[tuple[int, int]],  # (anchor time, turn_index), time-sorted
    window_of: Callable[[HoldInterval], tuple[int, int]],
) -> dict[int, int]:
    """Assign each hold the earliest unmatched candidate inside its window.

    Holds arrive sorted by start and all windows share one width, so this
    greedy pass is a maximum matching. Returns {hold position: turn_index}.
    """
    matched: dict[int, int] = {}
    used: set[int] = set()
    for pos, hold in enumerate(holds):
        lo, hi = window_of(hold)
        for anchor, turn_index in candidates:
            if turn_index in used:
                continue
            if anchor > hi:
                break
            if anchor >= lo:
                matched[pos] = turn_index
                used.add(turn_index)
                break
    return matched


def audit_call(
    call: Call,
    predicted_labels: Sequence[int],
    config: AuditConfig = AuditConfig(),
) -> ComplianceReport:
    """Audit one call given a predicted label per turn (aligned to call.turns)."""
    if len(predicted_labels) != len(call.turns):
        raise LabelCountMismatch(
            f"call {call.call_id!r}: {len(call.turns)} turns but {len(predicted_labels)} labels"
        )
    openings: list[tuple[int, int]] = []
    closings: list[tuple[int, int]] = []
    for turn, label in zip(call.turns, predicted_labels):
        if label == 1:
            openings.append((turn.end_ms, turn.turn_index))
        elif label == 2:
            closings.append((turn.start_ms, turn.turn_index))
    openings.sort()
    closings.sort()

    open_match = _greedy_match(
        call.holds,
        openings,
        lambda h: (h.hold_start_ms - config.pre_window_ms, h.hold_start_ms + config.grace_ms),
    )
    close_match = _greedy_match(
        call.holds,
        closings,
        lambda h: (h.hold_end_ms - config.grace_ms, h.hold_end_ms + config.post_window_ms),
    )

    verdicts = [
        HoldVerdict(
            hold=hold,
            opening_ok=pos in open_match,
            opening_turn_index=open_match.get(pos),
            closing_ok=pos in close_match,
            closing_turn_index=close_match.get(pos),
        )
        for pos, hold in enumerate(call.holds)
    ]
    matched_turns = set(open_match.values()) | set(close_match.values())
    unregistered = sorted(
        [(idx, 1) for _, idx in openings if idx not in matched_turns]
        + [(idx, 2) for _, idx in closings if idx not in matched_turns]
    )
    return ComplianceReport(call_id=call.call_id, verdicts=verdicts, unregistered=unregistered)


def gold_predictions(corpus: Corpus) -> dict[TurnKey, int]:
    """Use gold labels as predictions (oracle mode for audits)."""
    preds: dict[TurnKey, int] = {}
    for turn in corpus.iter_turns():
        if turn.label is None:
            raise MissingPredictions(turn.call_id)
        preds[turn.key] = turn.label
    return preds


def audit_corpus(
    corpus: Corpus,
    predictions: Mapping[TurnKey, int],
    config: AuditConfig = AuditConfig(),
) -> tuple[list[ComplianceReport], dict[str, int]]:
    """Audit every call; returns per-call reports plus violation-kind counts.

    Reports come back in call_id order regardless of corpus order.
    """
    reports: list[ComplianceReport] = []
    for call in sorted(corpus.calls, key=lambda c: c.call_id):
        labels = []
        for turn in call.turns:
            if turn.key not in predictions:
                raise MissingPredictions(call.call_id)
            labels.append(predictions[turn.key])
        reports.append(audit_call(call, labels, config))

    summary = Counter({kind: 0 for kind in VIOLATION_KINDS})
    for report in reports:
        for violation in report.violations():
            summary[violation.kind] += 1
    return reports, dict(summary)


def collect_violations(reports: Sequence[ComplianceReport]) -> list[Violation]:
    out: list[Violation] = []
    for report in reports:
        out.extend(report.violations())
    return out

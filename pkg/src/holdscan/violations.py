"""Script-compliance violation records.

Shared between the synthetic generator (which emits the ground-truth
ledger) and the auditor (which derives violations from a report), so the
two sides can be compared with plain set equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

MISSING_OPENING = "missing_opening"
MISSING_CLOSING = "missing_closing"
UNREGISTERED_HOLD = "unregistered_hold"
VIOLATION_KINDS = (MISSING_OPENING, MISSING_CLOSING, UNREGISTERED_HOLD)


@dataclass(frozen=True)
class Violation:
    """One compliance violation, anchored at a hold or at a turn.

    missing_opening / missing_closing carry the hold boundaries;
    unregistered_hold carries the turn index of the stray script phrase.
    """

    call_id: str
    kind: str
    hold_start_ms: Optional[int] = None
    hold_end_ms: Optional[int] = None
    turn_index: Optional[int] = None

    def __post_init__(self):
        if self.kind not in VIOLATION_KINDS:
            raise ValueError(f"kind must be one of {VIOLATION_KINDS}, got {self.kind!r}")
        if self.kind == UNREGISTERED_HOLD:
            if self.turn_index is None:
                raise ValueError("unregistered_hold violations must carry a turn_index")
        elif self.hold_start_ms is None or self.hold_end_ms is None:
            raise ValueError(f"{self.kind} violations must carry hold boundaries")

    def as_dict(self) -> dict:
        return {
            "call_id": self.call_id,
            "kind": self.kind,
            "hold_start_ms": self.hold_start_ms,
            "hold_end_ms": self.hold_end_ms,
            "turn_index": self.turn_index,
        }


ViolationLedger = list[Violation]

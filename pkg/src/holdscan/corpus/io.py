"""CSV ingestion and serialization for transcripts and hold logs.

Transcript CSV (UTF-8, header required):
    call_id,turn_index,channel,start_ms,end_ms,text,label
The label column is optional; the channel column is optional and defaults
to "unknown". Lines starting with '#' are treated as comments.

Holds CSV:
    call_id,hold_start_ms,hold_end_ms
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Optional, Union

from ..errors import (
    DuplicateTurnIndex,
    MalformedRow,
    MissingColumn,
    NonMonotonicTimestamps,
    UnknownCall,
)
from .model import CHANNELS, Call, Corpus, HoldInterval, PhraseTurn

PathLike = Union[str, Path]

TRANSCRIPT_COLUMNS = ("call_id", "turn_index", "channel", "start_ms", "end_ms", "text", "label")
REQUIRED_COLUMNS = ("call_id", "turn_index", "start_ms", "end_ms", "text")
HOLD_COLUMNS = ("call_id", "hold_start_ms", "hold_end_ms")


@dataclass(frozen=True)
class ColumnSchema:
    """Maps canonical transcript column names to the names used in a file."""

    call_id: str = "call_id"
    turn_index: str = "turn_index"
    channel: str = "channel"
    start_ms: str = "start_ms"
    end_ms: str = "end_ms"
    text: str = "text"
    label: str = "label"


DEFAULT_SCHEMA = ColumnSchema()


@dataclass(frozen=True)
class Diagnostic:
    line_no: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line_no}: {self.message}"


def _open_rows(path: PathLike) -> Iterator[tuple[int, list[str]]]:
    """Yield (physical line number, row cells), skipping comment lines."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for row in reader:
            if row and row[0].lstrip().startswith("#"):
                continue
            yield reader.line_num, row


def _parse_turn(line_no: int, row: list[str], positions: dict[str, int]) -> PhraseTurn:
    def cell(name: str) -> str:
        return row[positions[name]]

    try:
        turn_index = int(cell("turn_index"))
        start_ms = int(cell("start_ms"))
        end_ms = int(cell("end_ms"))
    except ValueError as exc:
        raise MalformedRow(line_no, f"non-integer field ({exc})") from None
    channel = cell("channel").strip() if "channel" in positions else "unknown"
    if channel == "":
        channel = "unknown"
    if channel not in CHANNELS:
        raise MalformedRow(line_no, f"channel must be one of {CHANNELS}, got {channel!r}")
    label: Optional[int] = None
    if "label" in positions:
        raw = cell("label").strip()
        if raw != "":
            try:
                label = int(raw)
            except ValueError:
                raise MalformedRow(line_no, f"label must be an integer, got {raw!r}") from None
    try:
        return PhraseTurn(
            call_id=cell("call_id"),
            turn_index=turn_index,
            channel=channel,
            start_ms=start_ms,
            end_ms=end_ms,
            text=cell("text"),
            label=label,
        )
    except ValueError as exc:
        raise MalformedRow(line_no, str(exc)) from None


def _scan_transcripts(path: PathLike, schema: ColumnSchema) -> Iterator[PhraseTurn | MalformedRow]:
    """Yield a PhraseTurn per data row, or the MalformedRow error describing it.

    Yielding errors instead of raising lets validate_transcripts keep going
    past the first bad row; ingest_transcripts re-raises the first one.
    Header-level problems (no header, missing columns) are raised directly.
    """
    rows = _open_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise MalformedRow(0, "file has no header row") from None

    name_for = {canon: getattr(schema, canon) for canon in TRANSCRIPT_COLUMNS}
    positions: dict[str, int] = {}
    for canon, actual in name_for.items():
        if actual in header:
            positions[canon] = header.index(actual)
    missing = [name_for[c] for c in REQUIRED_COLUMNS if c not in positions]
    if missing:
        raise MissingColumn(missing)
    width = max(positions.values()) + 1

    for line_no, row in rows:
        if not row:
            continue
        try:
            if len(row) < width:
                raise MalformedRow(line_no, f"expected at least {width} cells, got {len(row)}")
            yield _parse_turn(line_no, row, positions)
        except MalformedRow as exc:
            yield exc


def _build_corpus(turns: Iterable[PhraseTurn], provenance: str = "ingested") -> Corpus:
    by_call: dict[str, list[PhraseTurn]] = {}
    for turn in turns:
        by_call.setdefault(turn.call_id, []).append(turn)
    calls = []
    for call_id, call_turns in by_call.items():
        call_turns.sort(key=lambda t: t.turn_index)
        seen: set[int] = set()
        prev_start = None
        for turn in call_turns:
            if turn.turn_index in seen:
                raise DuplicateTurnIndex(call_id, turn.turn_index)
            seen.add(turn.turn_index)
            if prev_start is not None and turn.start_ms < prev_start:
                raise NonMonotonicTimestamps(call_id)
            prev_start = turn.start_ms
        calls.append(Call(call_id=call_id, turns=tuple(call_turns)))
    return Corpus(calls=tuple(calls), provenance=provenance)


def ingest_transcripts(path: PathLike, schema: ColumnSchema = DEFAULT_SCHEMA) -> Corpus:
    """Parse a transcript CSV into a Corpus.

    Row order within a call is normalized by turn_index. Raises
    MissingColumn, MalformedRow, DuplicateTurnIndex or
    NonMonotonicTimestamps on the first problem found.
    """
    def rows():
        for item in _scan_transcripts(path, schema):
            if isinstance(item, MalformedRow):
                raise item
            yield item

    return _build_corpus(rows())


def validate_transcripts(path: PathLike, schema: ColumnSchema = DEFAULT_SCHEMA) -> list[Diagnostic]:
    """Collect per-row diagnostics instead of failing on the first bad row.

    Returns an empty list when the file would ingest cleanly.
    """
    diagnostics: list[Diagnostic] = []
    turns: list[PhraseTurn] = []
    try:
        for item in _scan_transcripts(path, schema):
            if isinstance(item, MalformedRow):
                diagnostics.append(Diagnostic(item.line_no, item.reason))
            else:
                turns.append(item)
    except (MissingColumn, MalformedRow) as exc:
        return [Diagnostic(getattr(exc, "line_no", 1) or 1, str(exc))]
    try:
        _build_corpus(turns)
    except (DuplicateTurnIndex, NonMonotonicTimestamps) as exc:
        diagnostics.append(Diagnostic(0, str(exc)))
    return diagnostics


def ingest_holds(path: PathLike) -> dict[str, tuple[HoldInterval, ...]]:
    """Parse a holds CSV into per-call sorted hold intervals."""
    rows = _open_rows(path)
    try:
        _, header = next(rows)
    except StopIteration:
        raise MalformedRow(0, "file has no header row") from None
    missing = [c for c in HOLD_COLUMNS if c not in header]
    if missing:
        raise MissingColumn(missing)
    pos = {c: header.index(c) for c in HOLD_COLUMNS}

    by_call: dict[str, list[HoldInterval]] = {}
    for line_no, row in rows:
        if not row:
            continue
        if len(row) < len(header):
            raise MalformedRow(line_no, f"expected {len(header)} cells, got {len(row)}")
        try:
            start = int(row[pos["hold_start_ms"]])
            end = int(row[pos["hold_end_ms"]])
            interval = HoldInterval(start, end)
        except ValueError as exc:
            raise MalformedRow(line_no, str(exc)) from None
        by_call.setdefault(row[pos["call_id"]], []).append(interval)

    result: dict[str, tuple[HoldInterval, ...]] = {}
    for call_id, intervals in by_call.items():
        intervals.sort(key=lambda h: h.hold_start_ms)
        prev_end = None
        for hold in intervals:
            if prev_end is not None and hold.hold_start_ms < prev_end:
                raise MalformedRow(0, f"call {call_id!r}: overlapping holds")
            prev_end = hold.hold_end_ms
        result[call_id] = tuple(intervals)
    return result


def attach_holds(corpus: Corpus, holds: dict[str, tuple[HoldInterval, ...]]) -> Corpus:
    """Return a new Corpus with hold intervals attached to their calls."""
    for call_id in holds:
        if not corpus.has_call(call_id):
            raise UnknownCall(call_id)
    calls = tuple(
        Call(call_id=c.call_id, turns=c.turns, holds=holds.get(c.call_id, c.holds))
        for c in corpus.calls
    )
    return Corpus(calls=calls, provenance=corpus.provenance, seed=corpus.seed)


def write_transcripts(corpus: Corpus, path: PathLike, header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(TRANSCRIPT_COLUMNS)
        for call in corpus.calls:
            for t in call.turns:
                label = "" if t.label is None else t.label
                writer.writerow(
                    [t.call_id, t.turn_index, t.channel, t.start_ms, t.end_ms, t.text, label]
                )


def write_holds(corpus: Corpus, path: PathLike, header_comment: str | None = None) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(HOLD_COLUMNS)
        for call in corpus.calls:
            for hold in call.holds:
                writer.writerow([call.call_id, hold.hold_start_ms, hold.hold_end_ms])

"""Descriptive statistics over a labeled corpus, used for plot-data export."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ..errors import Unlabeled
from .model import Corpus


@dataclass
class CorpusStats:
    n_calls: int
    n_turns: int
    label_counts: dict[int, int]
    rows_per_call: Counter          # rows-in-call -> number of calls
    words_per_row: dict[int, Counter]  # label -> (word count -> number of rows)
    script_matrix: dict[tuple[int, int], int]  # (openings, closings) -> calls


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Histogram the corpus; every turn must carry a gold label."""
    rows_per_call: Counter = Counter()
    words_per_row: dict[int, Counter] = {0: Counter(), 1: Counter(), 2: Counter()}
    script_matrix: Counter = Counter()
    for call in corpus.calls:
        rows_per_call[len(call.turns)] += 1
        n_open = n_close = 0
        for turn in call.turns:
            if turn.label is None:
                raise Unlabeled(f"turn {turn.key} has no label; stats need a labeled corpus")
            words_per_row[turn.label][len(turn.text.split())] += 1
            if turn.label == 1:
                n_open += 1
            elif turn.label == 2:
                n_close += 1
        script_matrix[(n_open, n_close)] += 1
    return CorpusStats(
        n_calls=len(corpus.calls),
        n_turns=corpus.n_turns(),
        label_counts=corpus.label_counts(),
        rows_per_call=rows_per_call,
        words_per_row=words_per_row,
        script_matrix=dict(script_matrix),
    )

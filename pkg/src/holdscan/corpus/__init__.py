"""Transcript data model, ingestion, synthetic generation and fold splitting."""

from .model import (
    CHANNELS,
    CLOSING,
    IRRELEVANT,
    LABELS,
    OPENING,
    Call,
    Corpus,
    FoldPlan,
    HoldInterval,
    PhraseTurn,
    TurnKey,
)
from .io import (
    ColumnSchema,
    DEFAULT_SCHEMA,
    Diagnostic,
    attach_holds,
    ingest_holds,
    ingest_transcripts,
    validate_transcripts,
    write_holds,
    write_transcripts,
)
from .split import stratified_split
from .stats import CorpusStats, corpus_stats
from .synthetic import (
    DEFAULT_PROFILE,
    GeneratorProfile,
    generate_synthetic,
    load_profile,
)

__all__ = [
    "CHANNELS",
    "CLOSING",
    "IRRELEVANT",
    "LABELS",
    "OPENING",
    "Call",
    "ColumnSchema",
    "Corpus",
    "CorpusStats",
    "DEFAULT_PROFILE",
    "DEFAULT_SCHEMA",
    "Diagnostic",
    "FoldPlan",
    "GeneratorProfile",
    "HoldInterval",
    "PhraseTurn",
    "TurnKey",
    "attach_holds",
    "corpus_stats",
    "generate_synthetic",
    "ingest_holds",
    "ingest_transcripts",
    "load_profile",
    "stratified_split",
    "validate_transcripts",
    "write_holds",
    "write_transcripts",
]

"""holdscan: on-hold script detection and compliance auditing for call transcripts.

The pipeline runs in five stages: ingest or synthesize a per-turn corpus,
split it into stratified folds, train (or import) a per-turn scorer,
convert scores to classes with a threshold-moving rule tuned across folds,
and audit the detected scripts against registered hold intervals.
"""

from .classifier import (
    Checkpoint,
    FeatureSpec,
    ProbTriple,
    TrainConfig,
    featurize,
    load_checkpoint,
    load_external_proba,
    predict_proba,
    save_checkpoint,
    select_best_checkpoint,
    train,
    weighted_ce_loss_and_grad,
    write_proba,
)
from .compliance import (
    AuditConfig,
    ComplianceReport,
    HoldVerdict,
    audit_call,
    audit_corpus,
    collect_violations,
    gold_predictions,
)
from .corpus import (
    Call,
    Corpus,
    FoldPlan,
    GeneratorProfile,
    HoldInterval,
    PhraseTurn,
    corpus_stats,
    generate_synthetic,
    ingest_holds,
    ingest_transcripts,
    stratified_split,
)
from .decision import REJECT_ALL_THRESHOLD, DecisionRule, decide, decide_batch
from .metrics import (
    MetricBundle,
    binary_auc,
    confusion,
    macro_prf,
    mean_bundle,
    metric_bundle,
    roc_auc_ovr_macro,
)
from .tuning import (
    CvRun,
    SweepResult,
    run_cross_validation,
    shared_threshold_search,
    sweep,
)
from .violations import (
    MISSING_CLOSING,
    MISSING_OPENING,
    UNREGISTERED_HOLD,
    Violation,
    ViolationLedger,
)

__version__ = "0.1.0"

__all__ = [
    "AuditConfig",
    "Call",
    "Checkpoint",
    "ComplianceReport",
    "Corpus",
    "CvRun",
    "DecisionRule",
    "FeatureSpec",
    "FoldPlan",
    "GeneratorProfile",
    "HoldInterval",
    "HoldVerdict",
    "MISSING_CLOSING",
    "MISSING_OPENING",
    "MetricBundle",
    "PhraseTurn",
    "ProbTriple",
    "REJECT_ALL_THRESHOLD",
    "SweepResult",
    "TrainConfig",
    "UNREGISTERED_HOLD",
    "Violation",
    "ViolationLedger",
    "audit_call",
    "audit_corpus",
    "binary_auc",
    "collect_violations",
    "confusion",
    "corpus_stats",
    "decide",
    "decide_batch",
    "featurize",
    "generate_synthetic",
    "gold_predictions",
    "ingest_holds",
    "ingest_transcripts",
    "load_checkpoint",
    "load_external_proba",
    "macro_prf",
    "mean_bundle",
    "metric_bundle",
    "predict_proba",
    "roc_auc_ovr_macro",
    "run_cross_validation",
    "save_checkpoint",
    "select_best_checkpoint",
    "shared_threshold_search",
    "stratified_split",
    "sweep",
    "train",
    "weighted_ce_loss_and_grad",
    "write_proba",
    "__version__",
]

"""Turn scorer: hashed n-gram features into a linear softmax over 3 classes.

The scorer contract is deliberately narrow: a trained Checkpoint maps turn
texts to probability triples over {irrelevant, opening, closing}. Scores
produced elsewhere (e.g. by a fine-tuned transformer) enter through
load_external_proba and flow through the identical downstream machinery.

Training is plain mini-batch gradient descent on class-weighted
cross-entropy with decoupled weight decay and a step size that decays
linearly to zero. Internally the weight matrix is kept as scale * V so the
decay multiplies a scalar instead of the full matrix each step; gradients
touch only the feature rows present in a batch.
"""

from __future__ import annotations

import csv
import json
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import (
    DuplicateKey,
    EmptyInput,
    EmptyTrainingSet,
    MalformedRow,
    MissingColumn,
    ProbabilityInvariantViolation,
    SpecMismatch,
    UnlabeledExample,
)
from .metrics import roc_auc_ovr_macro

PathLike = Union[str, Path]

PROBA_COLUMNS = ("call_id", "turn_index", "p0", "p1", "p2")
MODEL_FORMAT_VERSION = 1

# Sum-of-probabilities tolerances: construction demands 1e-9, file loading
# renormalizes anything within 1e-6 and rejects the rest.
PROB_SUM_TOL = 1e-9
PROB_FILE_TOL = 1e-6


@dataclass(frozen=True)
class ProbTriple:
    """Probability vector over (irrelevant, opening, closing)."""

    p0: float
    p1: float
    p2: float

    def __post_init__(self):
        for value in (self.p0, self.p1, self.p2):
            if not (value >= 0.0):
                raise ProbabilityInvariantViolation(f"negative or NaN component {value!r}")
        total = self.p0 + self.p1 + self.p2
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise ProbabilityInvariantViolation(f"components sum to {total!r}, expected 1")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p0, self.p1, self.p2)


@dataclass(frozen=True)
class FeatureSpec:
    """Hashed bag-of-n-grams featurization parameters.

    max_tokens caps the number of whitespace tokens considered per turn,
    applied before n-gram extraction.
    """

    hash_dim: int = 2 ** 18
    char_ngram_min: int = 2
    char_ngram_max: int = 4
    word_unigrams: bool = True
    lowercase: bool = True
    max_tokens: int = 128

    def __post_init__(self):
        if self.hash_dim < 2 ** 10 or self.hash_dim & (self.hash_dim - 1):
            raise ValueError(f"hash_dim must be a power of two >= 1024, got {self.hash_dim}")
        if not 1 <= self.char_ngram_min <= self.char_ngram_max:
            raise ValueError("need 1 <= char_ngram_min <= char_ngram_max")
        if self.max_tokens < 1:
            raise ValueError(f"max_tokens must be >= 1, got {self.max_tokens}")


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    batch_size: int = 16
    learning_rate: float = 0.1
    weight_decay: float = 0.01
    class_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.weight_decay < 0:
            raise ValueError(f"weight_decay must be >= 0, got {self.weight_decay}")
        if len(self.class_weights) != 3 or any(w <= 0 for w in self.class_weights):
            raise ValueError(f"class_weights must be 3 positive reals, got {self.class_weights}")
        if self.learning_rate * self.weight_decay >= 1.0:
            raise ValueError("learning_rate * weight_decay must stay below 1")


@dataclass
class Checkpoint:
    """Model snapshot at an epoch boundary, scored on the validation fold."""

    epoch: int
    weights: np.ndarray  # (hash_dim, 3)
    bias: np.ndarray     # (3,)
    validation_auc: float
    feature_spec: FeatureSpec

    def __post_init__(self):
        if self.epoch < 1:
            raise ValueError(f"epoch must be >= 1, got {self.epoch}")


SparseCounts = dict[int, int]
_Feats = tuple[np.ndarray, np.ndarray]  # (bucket indices, counts)


def _bucket(tag: str, token: str, hash_dim: int) -> int:
    return zlib.crc32(f"{tag}\x00{token}".encode("utf-8")) % hash_dim


def featurize(text: str, spec: FeatureSpec) -> SparseCounts:
    """Sparse count vector of dimension spec.hash_dim, as {bucket: count}.

    Deterministic (crc32 hashing, no process salt). Empty text maps to the
    all-zero vector.
    """
    if spec.lowercase:
        text = text.lower()
    tokens = text.split()[: spec.max_tokens]
    counts: SparseCounts = {}
    if spec.word_unigrams:
        for token in tokens:
            b = _bucket("w", token, spec.hash_dim)
            counts[b] = counts.get(b, 0) + 1
    joined = " ".join(tokens)
    for n in range(spec.char_ngram_min, spec.char_ngram_max + 1):
        tag = f"c{n}"
        for i in range(len(joined) - n + 1):
            b = _bucket(tag, joined[i : i + n], spec.hash_dim)
            counts[b] = counts.get(b, 0) + 1
    return counts


def _featurize_many(texts: Sequence[str], spec: FeatureSpec) -> list[_Feats]:
    cache: dict[str, _Feats] = {}
    out = []
    for text in texts:
        feats = cache.get(text)
        if feats is None:
            counts = featurize(text, spec)
            idx = np.fromiter(sorted(counts), dtype=np.int64, count=len(counts))
            cnt = np.array([counts[i] for i in idx], dtype=np.float64)
            feats = (idx, cnt)
            cache[text] = feats
        out.append(feats)
    return out


def _softmax_rows(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _batch_logits(feats: Sequence[_Feats], weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    n = len(feats)
    logits = np.tile(bias, (n, 1))
    if n == 0:
        return logits
    lengths = np.array([len(f[0]) for f in feats])
    if lengths.sum() == 0:
        return logits
    rows = np.concatenate([f[0] for f in feats])
    vals = np.concatenate([f[1] for f in feats])
    seg = np.repeat(np.arange(n), lengths)
    contrib = vals[:, None] * weights[rows]
    for c in range(3):
        logits[:, c] += np.bincount(seg, weights=contrib[:, c], minlength=n)
    return logits


def weighted_ce_loss_and_grad(
    weights: np.ndarray,
    bias: np.ndarray,
    feats: Sequence[_Feats],
    y: Sequence[int],
    class_weights: Sequence[float],
) -> tuple[float, np.ndarray, np.ndarray]:
    """Batch-mean class-weighted cross-entropy with analytic gradients.

    The loss term of an example with true class y is multiplied by
    class_weights[y]; the batch loss is the plain mean of the weighted
    terms (so scaling all weights scales the loss by the same factor).
    Returns (loss, grad_weights, grad_bias); grad_weights is dense.
    """
    y = np.asarray(y)
    n = len(feats)
    if n == 0:
        raise EmptyInput("cannot evaluate the loss on an empty batch")
    cw = np.asarray(class_weights, dtype=float)
    probs = _softmax_rows(_batch_logits(feats, weights, bias))
    picked = probs[np.arange(n), y]
    loss = float(np.mean(cw[y] * -np.log(picked)))

    g_logits = probs.copy()
    g_logits[np.arange(n), y] -= 1.0
    g_logits *= (cw[y] / n)[:, None]
    grad_w = np.zeros_like(weights)
    for i, (idx, cnt) in enumerate(feats):
        if len(idx):
            grad_w[idx] += cnt[:, None] * g_logits[i]
    grad_b = g_logits.sum(axis=0)
    return loss, grad_w, grad_b


def train(
    examples: Sequence[tuple[str, Optional[int]]],
    config: TrainConfig,
    spec: FeatureSpec,
    validation: Sequence[tuple[str, Optional[int]]],
) -> list[Checkpoint]:
    """Train the linear softmax model, returning one Checkpoint per epoch.

    Deterministic given (examples, config, spec, validation): the per-epoch
    shuffle is driven solely by config.seed. Each checkpoint carries the
    macro one-vs-rest ROC AUC on the validation sequence.
    """
    if not examples:
        raise EmptyTrainingSet("training set is empty")
    if not validation:
        raise EmptyInput("validation set is empty")
    for text, label in list(examples) + list(validation):
        if label is None or label not in (0, 1, 2):
            raise UnlabeledExample(f"example {text[:40]!r} has label {label!r}")

    train_feats = _featurize_many([t for t, _ in examples], spec)
    y_train = np.array([label for _, label in examples])
    val_feats = _featurize_many([t for t, _ in validation], spec)
    y_val = np.array([label for _, label in validation])

    n = len(examples)
    cw = np.asarray(config.class_weights, dtype=float)
    rng = np.random.default_rng(config.seed)

    # weights = scale * v; the decoupled decay multiplies the scalar only.
    v = np.zeros((spec.hash_dim, 3))
    scale = 1.0
    bias = np.zeros(3)

    steps_per_epoch = (n + config.batch_size - 1) // config.batch_size
    total_steps = steps_per_epoch * config.epochs
    step = 0
    checkpoints: list[Checkpoint] = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            batch = order[start : start + config.batch_size]
            lr = config.learning_rate * (1.0 - step / total_steps)
            step += 1

            bsz = len(batch)
            logits = np.empty((bsz, 3))
            for j, i in enumerate(batch):
                idx, cnt = train_feats[int(i)]
                logits[j] = scale * (cnt @ v[idx]) + bias if len(idx) else bias
            probs = _softmax_rows(logits)
            yb = y_train[batch]
            g = probs
            g[np.arange(bsz), yb] -= 1.0
            g *= (cw[yb] / bsz)[:, None]

            scale *= 1.0 - lr * config.weight_decay
            if scale < 1e-100:  # refold to keep v representable
                v *= scale
                scale = 1.0
            coef = lr / scale
            for j, i in enumerate(batch):
                idx, cnt = train_feats[int(i)]
                if len(idx):
                    v[idx] -= coef * cnt[:, None] * g[j]
            bias -= lr * g.sum(axis=0)

        weights = scale * v
        val_probs = _softmax_rows(_batch_logits(val_feats, weights, bias))
        auc = roc_auc_ovr_macro(y_val, val_probs)
        checkpoints.append(
            Checkpoint(
                epoch=epoch,
                weights=weights,
                bias=bias.copy(),
                validation_auc=auc,
                feature_spec=spec,
            )
        )
    return checkpoints


def select_best_checkpoint(checkpoints: Sequence[Checkpoint]) -> Checkpoint:
    """Checkpoint with maximal validation AUC; ties go to the earliest epoch."""
    if not checkpoints:
        raise EmptyInput("no checkpoints to select from")
    best = checkpoints[0]
    for ckpt in checkpoints[1:]:
        if ckpt.validation_auc > best.validation_auc:
            best = ckpt
    return best


def predict_proba(
    model: Checkpoint, turns: Sequence[str], spec: FeatureSpec
) -> list[ProbTriple]:
    """Score turn texts with a trained checkpoint, one ProbTriple per turn."""
    if spec != model.feature_spec:
        raise SpecMismatch("supplied FeatureSpec differs from the one the model was trained with")
    feats = _featurize_many(turns, spec)
    probs = _softmax_rows(_batch_logits(feats, model.weights, model.bias))
    return [ProbTriple(float(p[0]), float(p[1]), float(p[2])) for p in probs]


# --- model files ----------------------------------------------------------


def save_checkpoint(path: PathLike, model: Checkpoint, extra_meta: dict | None = None) -> None:
    """Write a checkpoint as a compressed npz with a JSON metadata record.

    extra_meta lets callers stamp provenance fields (tool version, config
    hash); unknown keys are preserved but ignored on load.
    """
    meta = {
        "format_version": MODEL_FORMAT_VERSION,
        "epoch": model.epoch,
        "validation_auc": model.validation_auc,
        "feature_spec": {
            "hash_dim": model.feature_spec.hash_dim,
            "char_ngram_min": model.feature_spec.char_ngram_min,
            "char_ngram_max": model.feature_spec.char_ngram_max,
            "word_unigrams": model.feature_spec.word_unigrams,
            "lowercase": model.feature_spec.lowercase,
            "max_tokens": model.feature_spec.max_tokens,
        },
        **(extra_meta or {}),
    }
    np.savez_compressed(
        path,
        weights=model.weights,
        bias=model.bias,
        meta=np.frombuffer(json.dumps(meta, sort_keys=True).encode("utf-8"), dtype=np.uint8),
    )


def load_checkpoint(path: PathLike) -> Checkpoint:
    with np.load(path) as bundle:
        meta = json.loads(bundle["meta"].tobytes().decode("utf-8"))
        if meta.get("format_version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {meta.get('format_version')!r}")
        spec = FeatureSpec(**meta["feature_spec"])
        return Checkpoint(
            epoch=int(meta["epoch"]),
            weights=bundle["weights"],
            bias=bundle["bias"],
            validation_auc=float(meta["validation_auc"]),
            feature_spec=spec,
        )


# --- externally computed probabilities -------------------------------------


def load_external_proba(path: PathLike) -> dict[tuple[str, int], ProbTriple]:
    """Read a predictions CSV (call_id,turn_index,p0,p1,p2) into a key map.

    Rows whose probabilities sum to 1 within 1e-6 are renormalized; rows
    further off are rejected with ProbabilityInvariantViolation. Lines
    starting with '#' are ignored.
    """
    result: dict[tuple[str, int], ProbTriple] = {}
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = None
        for row in reader:
            if not row or row[0].lstrip().startswith("#"):
                continue
            if header is None:
                header = row
                missing = [c for c in PROBA_COLUMNS if c not in header]
                if missing:
                    raise MissingColumn(missing)
                pos = {c: header.index(c) for c in PROBA_COLUMNS}
                continue
            line_no = reader.line_num
            if len(row) < len(header):
                raise MalformedRow(line_no, f"expected {len(header)} cells, got {len(row)}")
            try:
                key = (row[pos["call_id"]], int(row[pos["turn_index"]]))
                p = [float(row[pos[c]]) for c in ("p0", "p1", "p2")]
            except ValueError as exc:
                raise MalformedRow(line_no, f"bad numeric field ({exc})") from None
            if key in result:
                raise DuplicateKey(*key)
            if any(not (x >= 0.0) for x in p):
                raise ProbabilityInvariantViolation(f"line {line_no}: negative probability")
            total = sum(p)
            if abs(total - 1.0) > PROB_FILE_TOL:
                raise ProbabilityInvariantViolation(
                    f"line {line_no}: probabilities sum to {total!r}"
                )
            if abs(total - 1.0) > PROB_SUM_TOL:
                p = [x / total for x in p]
            result[key] = ProbTriple(p[0], p[1], p[2])
        if header is None:
            raise MalformedRow(0, "file has no header row")
    return result


def write_proba(
    path: PathLike,
    rows: Iterable[tuple[str, int, ProbTriple]],
    header_comment: str | None = None,
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        writer = csv.writer(fh)
        writer.writerow(PROBA_COLUMNS)
        for call_id, turn_index, p in rows:
            writer.writerow([call_id, turn_index, repr(p.p0), repr(p.p1), repr(p.p2)])

"""Command-line interface.

Subcommands: validate, stats, generate, split, train, predict,
tune-threshold, evaluate, sweep, audit, pipeline. Every command reads an
optional key=value config file; explicit flags override file values. All
output files embed the tool version and a hash of the parameter config,
and every command is deterministic given its config and seed.

Exit codes: 0 ok, 1 usage or IO problem, 2 data validation failure,
3 numeric or protocol failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .classifier import (
    ProbTriple,
    load_checkpoint,
    load_external_proba,
    predict_proba,
    save_checkpoint,
    select_best_checkpoint,
    train,
    write_proba,
)
from .compliance import audit_corpus, gold_predictions
from .config import RunConfig, config_hash, load_run_config, with_overrides
from .corpus import (
    Corpus,
    FoldPlan,
    attach_holds,
    corpus_stats,
    generate_synthetic,
    ingest_holds,
    ingest_transcripts,
    load_profile,
    stratified_split,
    validate_transcripts,
    write_holds,
    write_transcripts,
)
from .corpus.synthetic import DEFAULT_PROFILE
from .decision import DecisionRule, decide_batch
from .errors import DataValidationError, HoldscanError, MissingPredictions
from .metrics import MetricBundle, metric_bundle
from .tuning import (
    DEFAULT_CLASS_WEIGHT_GRID,
    DEFAULT_LEARNING_RATE_GRID,
    run_cross_validation,
    shared_threshold_search,
    sweep as run_sweep,
)

TABLE_COLUMNS = ("ROC AUC", "Best threshold", "Recall", "Precision", "Balanced Accuracy", "F1")


# --- shared helpers --------------------------------------------------------


def _merged(config_file: str | None, **flags) -> RunConfig:
    base = load_run_config(config_file) if config_file else RunConfig()
    return with_overrides(base, **flags)


def _require_seed(cfg: RunConfig) -> int:
    if cfg.seed is None:
        raise click.UsageError("a --seed (or config 'seed') is required for this command")
    return cfg.seed


def _stamp(cfg: RunConfig) -> str:
    return f"holdscan {__version__} config={config_hash(cfg)}"


def _write_json(path: Path, payload: dict, cfg: RunConfig) -> None:
    payload = {"tool_version": __version__, "config_hash": config_hash(cfg), **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_corpus(transcripts: str, holds: str | None) -> Corpus:
    corpus = ingest_transcripts(transcripts)
    if holds:
        corpus = attach_holds(corpus, ingest_holds(holds))
    return corpus


def _bundle_row(bundle: MetricBundle) -> list[str]:
    return [
        f"{bundle.roc_auc_macro_ovr:.4f}",
        f"{bundle.threshold_used:.4f}",
        f"{bundle.recall_macro:.4f}",
        f"{bundle.precision_macro:.4f}",
        f"{bundle.balanced_accuracy:.4f}",
        f"{bundle.f1_macro:.4f}",
    ]


def _format_table(value_header: str, rows: list[tuple[str, MetricBundle]]) -> str:
    header = [value_header, *TABLE_COLUMNS]
    body = [[label, *_bundle_row(bundle)] for label, bundle in rows]
    widths = [max(len(header[i]), *(len(r[i]) for r in body)) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    for row in body:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    return "\n".join(lines) + "\n"


def _fold_plan_payload(plan: FoldPlan) -> dict:
    assignment = [[cid, idx, fold] for (cid, idx), fold in sorted(plan.assignment.items())]
    return {"k": plan.k, "test_fold": plan.test_fold, "assignment": assignment}


def _load_fold_plan(path: str) -> FoldPlan:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    assignment = {(cid, int(idx)): int(fold) for cid, idx, fold in data["assignment"]}
    return FoldPlan(k=int(data["k"]), assignment=assignment, test_fold=int(data["test_fold"]))


def _plan_for(cfg: RunConfig, corpus: Corpus, fold_plan_path: str | None) -> FoldPlan:
    if fold_plan_path:
        plan = _load_fold_plan(fold_plan_path)
        plan.validate_against(corpus)
        return plan
    seed = _require_seed(cfg)
    return stratified_split(corpus, cfg.folds, seed, cfg.split_mode, cfg.test_fold)


def _proba_by_fold(
    corpus: Corpus, plan: FoldPlan, proba: dict[tuple[str, int], ProbTriple]
) -> list[tuple[list[ProbTriple], list[int]]]:
    folds: list[tuple[list[ProbTriple], list[int]]] = []
    for keys in plan.keys_by_fold():
        probs, labels = [], []
        for key in keys:
            if key not in proba:
                raise MissingPredictions(key[0])
            probs.append(proba[key])
            labels.append(corpus.turn(key).label)
        folds.append((probs, labels))
    return folds


# --- command group ----------------------------------------------------------


@click.group()
@click.version_option(__version__, prog_name="holdscan")
def cli():
    """Detect on-hold scripts in call transcripts and audit hold compliance."""


_config_opt = click.option("--config", "config_file", type=click.Path(exists=True), default=None,
                           help="key=value config file; flags override it")


@cli.command()
@click.argument("transcripts", type=click.Path(exists=True))
def validate(transcripts):
    """Check a transcript CSV; exit 0 only when it ingests cleanly."""
    diagnostics = validate_transcripts(transcripts)
    if diagnostics:
        for diag in diagnostics:
            click.echo(str(diag))
        click.echo(f"{len(diagnostics)} invalid row(s)")
        sys.exit(2)
    corpus = ingest_transcripts(transcripts)
    counts = corpus.label_counts()
    unlabeled = corpus.n_turns() - sum(counts.values())
    click.echo(f"calls: {len(corpus.calls)}")
    click.echo(f"turns: {corpus.n_turns()}")
    click.echo(
        "rows per class: irrelevant={0} opening={1} closing={2} unlabeled={3}".format(
            counts[0], counts[1], counts[2], unlabeled
        )
    )


@cli.command()
@_config_opt
@click.option("--transcripts", type=click.Path(exists=True), required=True)
@click.option("--out-dir", type=click.Path(), required=True)
def stats(config_file, transcripts, out_dir):
    """Emit histogram CSVs (rows per call, words per row, script counts)."""
    cfg = _merged(config_file)
    corpus = ingest_transcripts(transcripts)
    st = corpus_stats(corpus)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = _stamp(cfg)

    with open(out / "rows_per_call.csv", "w", encoding="utf-8") as fh:
        fh.write(f"# {stamp}\nrows,calls\n")
        for rows in sorted(st.rows_per_call):
            fh.write(f"{rows},{st.rows_per_call[rows]}\n")
    with open(out / "words_per_row.csv", "w", encoding="utf-8") as fh:
        fh.write(f"# {stamp}\nlabel,words,rows\n")
        for label in (0, 1, 2):
            for words in sorted(st.words_per_row[label]):
                fh.write(f"{label},{words},{st.words_per_row[label][words]}\n")
    max_open = max((o for o, _ in st.script_matrix), default=0)
    max_close = max((c for _, c in st.script_matrix), default=0)
    with open(out / "script_count_matrix.csv", "w", encoding="utf-8") as fh:
        fh.write(f"# {stamp}\nopenings," + ",".join(f"closings_{c}" for c in range(max_close + 1)) + "\n")
        for o in range(max_open + 1):
            cells = [str(st.script_matrix.get((o, c), 0)) for c in range(max_close + 1)]
            fh.write(f"{o}," + ",".join(cells) + "\n")

    click.echo(f"calls: {st.n_calls}  turns: {st.n_turns}")
    click.echo(
        "rows per class: irrelevant={0} opening={1} closing={2}".format(
            st.label_counts[0], st.label_counts[1], st.label_counts[2]
        )
    )
    click.echo(f"wrote plot data to {out}")


@cli.command()
@_config_opt
@click.option("--calls", type=int, default=None, help="number of calls to generate")
@click.option("--seed", type=int, default=None)
@click.option("--profile", "profile_file", type=click.Path(exists=True), default=None)
@click.option("--out-dir", type=click.Path(), required=True)
def generate(config_file, calls, seed, profile_file, out_dir):
    """Generate a synthetic labeled corpus with holds and a violation ledger."""
    cfg = _merged(config_file, calls=calls, seed=seed)
    seed = _require_seed(cfg)
    profile = load_profile(profile_file) if profile_file else DEFAULT_PROFILE
    corpus, ledger = generate_synthetic(cfg.calls, seed, profile)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stamp = _stamp(cfg)
    write_transcripts(corpus, out / "transcripts.csv", header_comment=stamp)
    write_holds(corpus, out / "holds.csv", header_comment=stamp)
    _write_json(out / "violations.json", {"violations": [v.as_dict() for v in ledger]}, cfg)
    counts = corpus.label_counts()
    click.echo(
        f"generated {len(corpus.calls)} calls, {corpus.n_turns()} turns "
        f"(opening={counts[1]}, closing={counts[2]}), {len(ledger)} ground-truth violations"
    )
    click.echo(f"wrote corpus to {out}")


@cli.command()
@_config_opt
@click.option("--transcripts", type=click.Path(exists=True), required=True)
@click.option("--folds", type=int, default=None)
@click.option("--test-fold", type=int, default=None)
@click.option("--split-mode", type=click.Choice(["row", "call_grouped"]), default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_file", type=click.Path(), required=True)
def split(config_file, transcripts, folds, test_fold, split_mode, seed, out_file):
    """Write a stratified fold plan for a labeled transcript file."""
    cfg = _merged(config_file, folds=folds, test_fold=test_fold, split_mode=split_mode, seed=seed)
    corpus = ingest_transcripts(transcripts)
    plan = stratified_split(corpus, cfg.folds, _require_seed(cfg), cfg.split_mode, cfg.test_fold)
    _write_json(Path(out_file), _fold_plan_payload(plan), cfg)
    click.echo(f"assigned {len(plan.assignment)} turns to {plan.k} folds (test fold {plan.test_fold})")


_train_opts = [
    click.option("--epochs", type=int, default=None),
    click.option("--batch-size", type=int, default=None),
    click.option("--learning-rate", type=float, default=None),
    click.option("--weight-decay", type=float, default=None),
    click.option("--class-weights", type=str, default=None, help="w0,w1,w2"),
    click.option("--hash-dim", type=int, default=None),
    click.option("--max-tokens", type=int, default=None),
]


def _add_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


@cli.command(name="train")
@_config_opt
@click.option("--transcripts", type=click.Path(exists=True), required=True)
@click.option("--folds", type=int, default=None)
@click.option("--test-fold", type=int, default=None)
@click.option("--val-fold", type=int, required=True, help="fold held out for checkpoint selection")
@click.option("--seed", type=int, default=None)
@_add_options(_train_opts)
@click.option("--model-out", type=click.Path(), required=True)
def train_cmd(config_file, transcripts, folds, test_fold, val_fold, seed, epochs, batch_size,
              learning_rate, weight_decay, class_weights, hash_dim, max_tokens, model_out):
    """Train one model on all folds except the validation and test folds."""
    cfg = _merged(config_file, folds=folds, test_fold=test_fold, seed=seed, epochs=epochs,
                  batch_size=batch_size, learning_rate=learning_rate, weight_decay=weight_decay,
                  class_weights=class_weights, hash_dim=hash_dim, max_tokens=max_tokens)
    corpus = ingest_transcripts(transcripts)
    plan = stratified_split(corpus, cfg.folds, _require_seed(cfg), cfg.split_mode, cfg.test_fold)
    if not 0 <= val_fold < plan.k or val_fold == plan.test_fold:
        raise click.UsageError(f"--val-fold must be a non-test fold in [0, {plan.k})")
    keys_by_fold = plan.keys_by_fold()
    train_examples = [
        (corpus.turn(key).text, corpus.turn(key).label)
        for f in range(plan.k)
        if f not in (val_fold, plan.test_fold)
        for key in keys_by_fold[f]
    ]
    val_examples = [
        (corpus.turn(key).text, corpus.turn(key).label) for key in keys_by_fold[val_fold]
    ]
    checkpoints = train(train_examples, cfg.train_config(), cfg.feature_spec(), val_examples)
    for ckpt in checkpoints:
        click.echo(f"epoch {ckpt.epoch}: validation ROC AUC {ckpt.validation_auc:.4f}")
    best = select_best_checkpoint(checkpoints)
    save_checkpoint(model_out, best,
                    extra_meta={"tool_version": __version__, "config_hash": config_hash(cfg)})
    click.echo(f"saved epoch-{best.epoch} checkpoint to {model_out}")


@cli.command()
@_config_opt
@click.option("--model", "model_file", type=click.Path(exists=True), required=True)
@click.option("--transcripts", type=click.Path(exists=True), required=True)
@click.option("--out", "out_file", type=click.Path(), required=True)
def predict(config_file, model_file, transcripts, out_file):
    """Score every turn with a saved model; write a predictions CSV."""
    cfg = _merged(config_file)
    corpus = ingest_transcripts(transcripts)
    model = load_checkpoint(model_file)
    turns = list(corpus.iter_turns())
    probs = predict_proba(model, [t.text for t in turns], model.feature_spec)
    write_proba(
        out_file,
        [(t.call_id, t.turn_index, p) for t, p in zip(turns, probs)],
        header_comment=_stamp(cfg),
    )
    click.echo(f"wrote {len(turns)} predictions to {out_file}")


@cli.command(name="tune-threshold")
@_config_opt
@click.option("--transcripts", type=click.Path(exists=True), required=True)
@click.option("--proba", "proba_file", type=click.Path(exists=True), required=True)
@click.option("--fold-plan", "fold_plan_file", type=click.Path(exists=True), default=None)
@click.option("--folds", type=int, default=None)
@click.option("--test-fold", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_file", type=click.Path(), default=None)
def tune_threshold(config_file, transcripts, proba_file, fold_plan_file, folds, test_fold, seed, out_file):
    """Choose the shared threshold over the non-test folds of a predictions file."""
    cfg = _merged(config_file, folds=folds, test_fold=test_fold, seed=seed)
    corpus = ingest_transcripts(transcripts)
    plan = _plan_for(cfg, corpus, fold_plan_file)
    proba = load_external_proba(proba_file)
    by_fold = _proba_by_fold(corpus, plan, proba)
    val_folds = [by_fold[f] for f in range(plan.k) if f != plan.test_fold]
    threshold, mean_f1 = shared_threshold_search(val_folds)
    click.echo(f"shared threshold: {threshold!r}")
    click.echo(f"mean validation F1-macro: {mean_f1:.4f}")
    if out_file:
        _write_json(Path(out_file), {"shared_threshold": threshold, "mean_f1_macro": mean_f1}, cfg)


@cli.command()
@_config_opt
@click.option("--transcripts", type=click.Path(exists=True), required=True)
@click.option("--proba", "proba_file", type=click.Path(exists=True), required=True)
@click.option("--threshold", type=float, required=True)
@click.option("--fold-plan", "fold_plan_file", type=click.Path(exists=True), default=None)
@click.option("--fold", type=int, default=None, help="evaluate only this fold of the plan")
@click.option("--folds", type=int, default=None)
@click.option("--test-fold", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_file", type=click.Path(), default=None)
def evaluate(config_file, transcripts, proba_file, threshold, fold_plan_file, fold, folds,
             test_fold, seed, out_file):
    """Compute the metric row for a predictions file at a fixed threshold."""
    cfg = _merged(config_file, folds=folds, test_fold=test_fold, seed=seed, threshold=threshold)
    corpus = ingest_transcripts(transcripts)
    proba = load_external_proba(proba_file)
    if fold is not None:
        plan = _plan_for(cfg, corpus, fold_plan_file)
        keys = plan.keys_by_fold()[fold]
    else:
        keys = corpus.labeled_keys()
    probs, labels = [], []
    for key in keys:
        if key not in proba:
            raise MissingPredictions(key[0])
        probs.append(proba[key])
        labels.append(corpus.turn(key).label)
    y_pred = decide_batch(probs, DecisionRule(threshold))
    bundle = metric_bundle(labels, probs, y_pred, threshold)
    for name, value in bundle.as_dict().items():
        click.echo(f"{name}: {value:.6f}")
    if out_file:
        _write_json(Path(out_file), {"metrics": bundle.as_dict(), "n_examples": len(labels)}, cfg)


@cli.command()
@_config_opt
@click.option("--transcripts", type=click.Path(exists=True), default=None)
@click.option("--synthetic-calls", type=int, default=None, help="generate the corpus instead of reading one")
@click.option("--axis", type=click.Choice(["class_weights", "learning_rate"]), required=True)
@click.option("--values", type=str, default=None,
              help="grid values; ';'-separated (class weight triples use commas inside)")
@click.option("--folds", type=int, default=None)
@click.option("--test-fold", type=int, default=None)
@click.option("--seed", type=int, default=None)
@_add_options(_train_opts)
@click.option("--out-dir", type=click.Path(), required=True)
def sweep(config_file, transcripts, synthetic_calls, axis, values, folds, test_fold, seed,
          epochs, batch_size, learning_rate, weight_decay, class_weights, hash_dim, max_tokens,
          out_dir):
    """Run one cross-validation per grid value and tabulate the results."""
    cfg = _merged(config_file, calls=synthetic_calls, folds=folds, test_fold=test_fold, seed=seed,
                  epochs=epochs, batch_size=batch_size, learning_rate=learning_rate,
                  weight_decay=weight_decay, class_weights=class_weights, hash_dim=hash_dim,
                  max_tokens=max_tokens)
    corpus = _pipeline_corpus(cfg, transcripts, synthetic_calls is not None)
    if values:
        if axis == "class_weights":
            grid = [tuple(float(x) for x in chunk.split(",")) for chunk in values.split(";") if chunk]
        else:
            grid = [float(chunk) for chunk in values.replace(";", ",").split(",") if chunk]
    else:
        grid = list(DEFAULT_CLASS_WEIGHT_GRID if axis == "class_weights" else DEFAULT_LEARNING_RATE_GRID)
    plan = stratified_split(corpus, cfg.folds, _require_seed(cfg), cfg.split_mode, cfg.test_fold)
    result = run_sweep(corpus, plan, cfg.train_config(), axis, grid, cfg.feature_spec())

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = [(str(v), b) for v, b in result.rows()]
    table = _format_table(axis, rows)
    (out / "sweep_table.txt").write_text(f"# {_stamp(cfg)}\n{table}", encoding="utf-8")
    _write_json(
        out / "sweep.json",
        {
            "axis": axis,
            "rows": [
                {"value": list(v) if isinstance(v, tuple) else v, "metrics": b.as_dict()}
                for v, b in result.rows()
            ],
            "best_index": result.best_index,
            "best_value": (
                list(result.values[result.best_index])
                if isinstance(result.values[result.best_index], tuple)
                else result.values[result.best_index]
            ),
        },
        cfg,
    )
    click.echo(table.rstrip("\n"))
    click.echo(f"best {axis}: {result.values[result.best_index]} "
               f"(F1-macro {result.bundles[result.best_index].f1_macro:.4f})")


@cli.command()
@_config_opt
@click.option("--transcripts", type=click.Path(exists=True), required=True)
@click.option("--holds", "holds_file", type=click.Path(exists=True), required=True)
@click.option("--proba", "proba_file", type=click.Path(exists=True), default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--gold", is_flag=True, help="audit gold labels instead of predictions")
@click.option("--pre-window-ms", type=int, default=None)
@click.option("--post-window-ms", type=int, default=None)
@click.option("--grace-ms", type=int, default=None)
@click.option("--out", "out_file", type=click.Path(), default=None)
def audit(config_file, transcripts, holds_file, proba_file, threshold, gold,
          pre_window_ms, post_window_ms, grace_ms, out_file):
    """Audit detected scripts against registered holds, call by call."""
    cfg = _merged(config_file, threshold=threshold, pre_window_ms=pre_window_ms,
                  post_window_ms=post_window_ms, grace_ms=grace_ms)
    corpus = _load_corpus(transcripts, holds_file)
    if gold:
        predictions = gold_predictions(corpus)
    else:
        if not proba_file or cfg.threshold is None:
            raise click.UsageError("need --proba and --threshold, or --gold")
        proba = load_external_proba(proba_file)
        turns = list(corpus.iter_turns())
        missing = [t.call_id for t in turns if t.key not in proba]
        if missing:
            raise MissingPredictions(missing[0])
        rule = DecisionRule(cfg.threshold)
        labels = decide_batch([proba[t.key] for t in turns], rule)
        predictions = {t.key: label for t, label in zip(turns, labels)}

    reports, summary = audit_corpus(corpus, predictions, cfg.audit_config())
    for report in reports:
        for v in report.verdicts:
            opening = f"opening ok (turn {v.opening_turn_index})" if v.opening_ok else "opening MISSING"
            closing = f"closing ok (turn {v.closing_turn_index})" if v.closing_ok else "closing MISSING"
            click.echo(
                f"{report.call_id}: hold {v.hold.hold_start_ms}-{v.hold.hold_end_ms} ms: "
                f"{opening}, {closing}"
            )
        for turn_index, label in report.unregistered:
            kind = "opening" if label == 1 else "closing"
            click.echo(f"{report.call_id}: turn {turn_index}: unregistered {kind} script")
    click.echo(
        "summary: missing_opening={missing_opening} missing_closing={missing_closing} "
        "unregistered_hold={unregistered_hold}".format(**summary)
    )
    if out_file:
        payload = {
            "summary": summary,
            "calls": [
                {
                    "call_id": r.call_id,
                    "holds": [
                        {
                            "hold_start_ms": v.hold.hold_start_ms,
                            "hold_end_ms": v.hold.hold_end_ms,
                            "opening_ok": v.opening_ok,
                            "opening_turn_index": v.opening_turn_index,
                            "closing_ok": v.closing_ok,
                            "closing_turn_index": v.closing_turn_index,
                        }
                        for v in r.verdicts
                    ],
                    "unregistered": [
                        {"turn_index": idx, "predicted_class": label} for idx, label in r.unregistered
                    ],
                }
                for r in reports
            ],
        }
        _write_json(Path(out_file), payload, cfg)


def _pipeline_corpus(cfg: RunConfig, transcripts: str | None, synthetic: bool) -> Corpus:
    if synthetic == (transcripts is not None):
        raise click.UsageError("provide exactly one of --transcripts or --synthetic-calls")
    if synthetic:
        corpus, _ = generate_synthetic(cfg.calls, _require_seed(cfg), DEFAULT_PROFILE)
        return corpus
    return ingest_transcripts(transcripts)


@cli.command()
@_config_opt
@click.option("--transcripts", type=click.Path(exists=True), default=None)
@click.option("--synthetic-calls", type=int, default=None)
@click.option("--external-proba", "external_proba_file", type=click.Path(exists=True), default=None,
              help="skip training and tune/evaluate these probabilities")
@click.option("--folds", type=int, default=None)
@click.option("--test-fold", type=int, default=None)
@click.option("--split-mode", type=click.Choice(["row", "call_grouped"]), default=None)
@click.option("--seed", type=int, default=None)
@_add_options(_train_opts)
@click.option("--out-dir", type=click.Path(), required=True)
def pipeline(config_file, transcripts, synthetic_calls, external_proba_file, folds, test_fold,
             split_mode, seed, epochs, batch_size, learning_rate, weight_decay, class_weights,
             hash_dim, max_tokens, out_dir):
    """Split, cross-validate, pick the shared threshold and evaluate the test fold."""
    cfg = _merged(config_file, calls=synthetic_calls, folds=folds, test_fold=test_fold,
                  split_mode=split_mode, seed=seed, epochs=epochs, batch_size=batch_size,
                  learning_rate=learning_rate, weight_decay=weight_decay,
                  class_weights=class_weights, hash_dim=hash_dim, max_tokens=max_tokens)
    corpus = _pipeline_corpus(cfg, transcripts, synthetic_calls is not None)
    summary = run_pipeline(cfg, corpus, Path(out_dir),
                           external_proba_file=external_proba_file)
    click.echo(f"shared threshold: {summary['shared_threshold']!r}")
    click.echo(f"mean test F1-macro: {summary['mean_test_metrics']['f1_macro']:.4f}")
    click.echo(f"artifacts in {out_dir}")


def run_pipeline(
    cfg: RunConfig,
    corpus: Corpus,
    out_dir: Path,
    external_proba_file: str | None = None,
) -> dict:
    """Programmatic pipeline entry; returns the metrics payload it writes."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plan = stratified_split(corpus, cfg.folds, _require_seed(cfg), cfg.split_mode, cfg.test_fold)
    _write_json(out_dir / "fold_plan.json", _fold_plan_payload(plan), cfg)

    if external_proba_file:
        proba = load_external_proba(external_proba_file)
        by_fold = _proba_by_fold(corpus, plan, proba)
        val_folds = [by_fold[f] for f in range(plan.k) if f != plan.test_fold]
        threshold, mean_f1 = shared_threshold_search(val_folds)
        test_probs, test_labels = by_fold[plan.test_fold]
        y_pred = decide_batch(test_probs, DecisionRule(threshold))
        bundle = metric_bundle(test_labels, test_probs, y_pred, threshold)
        payload = {
            "mode": "external",
            "k": plan.k,
            "test_fold": plan.test_fold,
            "shared_threshold": threshold,
            "validation_mean_f1": mean_f1,
            "per_fold_test_metrics": [bundle.as_dict()],
            "mean_test_metrics": bundle.as_dict(),
        }
        table_rows = [("external", bundle)]
    else:
        run = run_cross_validation(corpus, plan, cfg.train_config(), cfg.feature_spec())
        models_dir = out_dir / "models"
        models_dir.mkdir(exist_ok=True)
        stamp_meta = {"tool_version": __version__, "config_hash": config_hash(cfg)}
        for result in run.folds:
            save_checkpoint(models_dir / f"fold_{result.fold_index}.npz", result.checkpoint,
                            extra_meta=stamp_meta)
        threshold = run.shared_threshold
        payload = {
            "mode": "trained",
            "k": plan.k,
            "test_fold": plan.test_fold,
            "shared_threshold": run.shared_threshold,
            "validation_mean_f1": run.shared_threshold_mean_f1,
            "per_fold_validation_auc": {
                str(r.fold_index): r.checkpoint.validation_auc for r in run.folds
            },
            "per_fold_test_metrics": [b.as_dict() for b in run.test_bundles],
            "mean_test_metrics": run.mean_test_bundle.as_dict(),
        }
        table_rows = [("mean of folds", run.mean_test_bundle)]

    _write_json(out_dir / "shared_threshold.json",
                {"shared_threshold": threshold,
                 "mean_f1_macro": payload["validation_mean_f1"]}, cfg)
    _write_json(out_dir / "metrics.json", payload, cfg)
    (out_dir / "results_table.txt").write_text(
        f"# {_stamp(cfg)}\n{_format_table('Run', table_rows)}", encoding="utf-8"
    )
    return payload


def run_cli(argv: list[str] | None = None) -> None:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, prog_name="holdscan", standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        sys.exit(1)
    except click.ClickException as exc:
        exc.show()
        sys.exit(exc.exit_code)
    except click.Abort:
        sys.exit(1)
    except DataValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except HoldscanError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(3)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    run_cli()

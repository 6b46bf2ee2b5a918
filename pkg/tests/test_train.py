import numpy as np
import pytest

from holdscan.classifier import (
    Checkpoint,
    FeatureSpec,
    TrainConfig,
    _featurize_many,
    predict_proba,
    select_best_checkpoint,
    train,
    weighted_ce_loss_and_grad,
)
from holdscan.errors import EmptyInput, EmptyTrainingSet, UnlabeledExample

SPEC = FeatureSpec(hash_dim=2 ** 10)


def toy_separable():
    examples = [("alpha", 0)] * 50 + [("bravo", 1)] * 50
    return examples


def test_separable_toy_reaches_full_accuracy():
    examples = toy_separable()
    config = TrainConfig(epochs=5, learning_rate=0.1, seed=0)
    checkpoints = train(examples, config, SPEC, validation=examples)
    final = checkpoints[-1]
    probs = predict_proba(final, [t for t, _ in examples], SPEC)
    preds = [int(np.argmax(p.as_tuple())) for p in probs]
    assert preds == [label for _, label in examples]


def test_one_checkpoint_per_epoch():
    checkpoints = train(toy_separable(), TrainConfig(epochs=5, seed=0), SPEC, toy_separable())
    assert [c.epoch for c in checkpoints] == [1, 2, 3, 4, 5]


def test_training_deterministic():
    examples = toy_separable()
    config = TrainConfig(epochs=3, seed=42)
    a = train(examples, config, SPEC, examples)
    b = train(examples, config, SPEC, examples)
    for ca, cb in zip(a, b):
        assert np.array_equal(ca.weights, cb.weights)
        assert np.array_equal(ca.bias, cb.bias)
        assert ca.validation_auc == cb.validation_auc


def test_uniform_class_weight_scaling_scales_loss():
    feats = _featurize_many(["aa bb", "cc dd", "ee"], SPEC)
    y = [0, 1, 2]
    rng = np.random.default_rng(0)
    w = rng.normal(size=(SPEC.hash_dim, 3)) * 0.1
    b = rng.normal(size=3) * 0.1
    loss1, g1w, g1b = weighted_ce_loss_and_grad(w, b, feats, y, (1.0, 1.0, 1.0))
    loss2, g2w, g2b = weighted_ce_loss_and_grad(w, b, feats, y, (2.0, 2.0, 2.0))
    assert loss2 == pytest.approx(2.0 * loss1, rel=1e-12)
    assert np.allclose(g2w, 2.0 * g1w, rtol=1e-12)
    assert np.allclose(g2b, 2.0 * g1b, rtol=1e-12)


def test_gradient_matches_central_differences():
    spec = FeatureSpec(hash_dim=2 ** 10, char_ngram_min=2, char_ngram_max=3)
    feats = _featurize_many(["hold on", "thanks", "ok"], spec)
    y = [1, 2, 0]
    cw = (0.3, 1.0, 2.0)
    rng = np.random.default_rng(7)
    w = rng.normal(size=(spec.hash_dim, 3)) * 0.5
    b = rng.normal(size=3) * 0.5
    _, grad_w, grad_b = weighted_ce_loss_and_grad(w, b, feats, y, cw)

    eps = 1e-5
    touched = sorted({int(i) for f in feats for i in f[0]})
    for row in touched:
        for col in range(3):
            w[row, col] += eps
            up, _, _ = weighted_ce_loss_and_grad(w, b, feats, y, cw)
            w[row, col] -= 2 * eps
            down, _, _ = weighted_ce_loss_and_grad(w, b, feats, y, cw)
            w[row, col] += eps
            numeric = (up - down) / (2 * eps)
            denom = max(abs(numeric), 1e-8)
            assert abs(grad_w[row, col] - numeric) / denom < 1e-6
    for col in range(3):
        b[col] += eps
        up, _, _ = weighted_ce_loss_and_grad(w, b, feats, y, cw)
        b[col] -= 2 * eps
        down, _, _ = weighted_ce_loss_and_grad(w, b, feats, y, cw)
        b[col] += eps
        numeric = (up - down) / (2 * eps)
        assert abs(grad_b[col] - numeric) / max(abs(numeric), 1e-8) < 1e-6


def test_single_step_matches_reference_gradient():
    # One epoch, one batch, no decay: the trained weights must equal a
    # single explicit gradient step from zero.
    examples = [("aa", 0), ("bb", 1), ("cc", 2), ("dd", 0)]
    config = TrainConfig(epochs=1, batch_size=8, learning_rate=0.5, weight_decay=0.0, seed=3)
    ckpt = train(examples, config, SPEC, examples)[0]

    feats = _featurize_many([t for t, _ in examples], SPEC)
    y = [label for _, label in examples]
    zero_w = np.zeros((SPEC.hash_dim, 3))
    zero_b = np.zeros(3)
    _, grad_w, grad_b = weighted_ce_loss_and_grad(zero_w, zero_b, feats, y, config.class_weights)
    assert np.array_equal(ckpt.weights, -config.learning_rate * grad_w)
    assert np.array_equal(ckpt.bias, -config.learning_rate * grad_b)


def test_raising_class_weight_never_loses_class1_predictions():
    # 30 copies of an ambiguous text labeled 0 vs 10 labeled 1: upweighting
    # class 1 should flip the shared text toward class 1, never away.
    examples = [("ping", 0)] * 30 + [("ping", 1)] * 10 + [("safe", 2)] * 10 + [("calm", 0)] * 10
    val = [("ping", 1), ("safe", 2), ("calm", 0)]

    def count_class1(weight1: float) -> int:
        config = TrainConfig(epochs=20, learning_rate=0.5, seed=5,
                             class_weights=(1.0, weight1, 1.0))
        final = train(examples, config, SPEC, val)[-1]
        probs = predict_proba(final, [t for t, _ in examples], SPEC)
        return sum(1 for p in probs if np.argmax(p.as_tuple()) == 1)

    counts = [count_class1(w) for w in (1.0, 4.0, 16.0)]
    assert counts[0] <= counts[1] <= counts[2]
    assert counts[-1] > 0


def test_select_best_checkpoint_rules():
    def ckpt(epoch, auc):
        return Checkpoint(epoch=epoch, weights=np.zeros((SPEC.hash_dim, 3)),
                          bias=np.zeros(3), validation_auc=auc, feature_spec=SPEC)

    picked = select_best_checkpoint([ckpt(1, 0.7), ckpt(2, 0.9), ckpt(3, 0.8)])
    assert picked.epoch == 2
    tied = select_best_checkpoint([ckpt(1, 0.9), ckpt(2, 0.9)])
    assert tied.epoch == 1
    single = ckpt(1, 0.4)
    assert select_best_checkpoint([single]) is single
    with pytest.raises(EmptyInput):
        select_best_checkpoint([])


def test_empty_training_set_rejected():
    with pytest.raises(EmptyTrainingSet):
        train([], TrainConfig(seed=0), SPEC, [("x", 0)])


def test_empty_validation_rejected():
    with pytest.raises(EmptyInput):
        train([("x", 0)], TrainConfig(seed=0), SPEC, [])


def test_unlabeled_example_rejected():
    with pytest.raises(UnlabeledExample):
        train([("x", None)], TrainConfig(seed=0), SPEC, [("y", 0), ("z", 1)])


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(class_weights=(1.0, 0.0, 1.0))
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=-0.1)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=200.0, weight_decay=0.01)

"""
Tests for the training loop, evaluation and parameter accounting
"""
import copy
import dataclasses
import hashlib
import json
import math

import numpy as np
import pytest

from shorttext import create_model, training
from shorttext.config import (
    BaseConfig,
    DeskConfig,
    DistilConfig,
    EncoderConfig,
    FusionConfig,
    ModelConfig,
    TestingConfig,
)
from shorttext.data import Example, SplitSpec, stratified_split
from shorttext.errors import DataError, TrainingDivergedError
from shorttext.metrics import majority_baseline
from shorttext.models import HierarchicalClassifier, LSTMCell
from shorttext.nn import Embedding, Rng
from shorttext.text import build_vocab
from shorttext.training import (
    EarlyStopping,
    ExperimentReport,
    closed_form_counts,
    count_params,
    evaluate,
    predict_texts,
    train,
)
from tests.conftest import LABEL_NAMES, synthetic_examples

LABELS = list(LABEL_NAMES)


@pytest.fixture(scope="module")
def splits():
    return stratified_split(synthetic_examples(), SplitSpec(seed=42))


@pytest.fixture(scope="module")
def split_vocab(splits):
    return build_vocab([e.text for e in splits[0]], max_size=60)


@pytest.fixture(scope="module")
def trained(splits, split_vocab):
    """The default preset trained with its own epoch budget and patience"""
    train_set, val_set, test_set = splits
    config = DeskConfig.train_config()
    model, report = train(
        train_set, val_set, config, vocab=split_vocab, label_names=LABELS, test_examples=test_set
    )
    return model, report


def accuracy(model, examples, vocab):
    labels, _ = predict_texts(model, [e.text for e in examples], vocab, max_len=64)
    return np.mean(np.array(labels) == np.array([e.label for e in examples]))


def frozen_digest(model):
    digest = hashlib.sha256()
    for name, p in model.named_parameters():
        if not p.trainable:
            digest.update(name.encode("utf-8"))
            digest.update(p.values.tobytes())
    return digest.hexdigest()


def reference_stop(losses, patience):
    best, best_epoch, bad = float("inf"), 0, 0
    for epoch, loss in enumerate(losses, start=1):
        if loss < best:
            best, best_epoch, bad = loss, epoch, 0
        else:
            bad += 1
            if bad >= patience:
                return epoch, best_epoch
    return len(losses), best_epoch


class TestEarlyStopping:
    """Tests for the patience rule"""

    def test_injected_sequence(self):
        stopper = EarlyStopping(patience=3)
        flags = [stopper.update(epoch, loss) for epoch, loss in enumerate([1.0, 0.9, 0.95, 0.96, 0.97], start=1)]
        assert flags == [False, False, False, False, True]
        assert stopper.best_epoch == 2

    def test_equal_loss_is_not_an_improvement(self):
        stopper = EarlyStopping(patience=1)
        stopper.update(1, 0.5)
        assert stopper.update(2, 0.5) is True

    def test_matches_reference_rule(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            losses = rng.choice([0.1, 0.2, 0.3, 0.4], size=12).tolist()
            patience = int(rng.integers(1, 5))
            stopper = EarlyStopping(patience)
            stop_epoch = len(losses)
            for epoch, loss in enumerate(losses, start=1):
                if stopper.update(epoch, loss):
                    stop_epoch = epoch
                    break
            assert (stop_epoch, stopper.best_epoch) == reference_stop(losses, patience)


def test_train_restores_best_epoch(monkeypatch, splits, split_vocab):
    """Test losses 1.0, 0.9, 0.95, 0.96, 0.97 -> five epochs, epoch-2 parameters"""
    losses = iter([1.0, 0.9, 0.95, 0.96, 0.97])
    monkeypatch.setattr(training, "validation_loss", lambda *args, **kwargs: next(losses))
    snapshots = {}

    def remember(epoch, train_loss, val_loss, model):
        snapshots[epoch] = model.state()

    config = TestingConfig.train_config(max_epochs=10, patience=3)
    model, report = train(
        splits[0][::8], splits[1], config, vocab=split_vocab, label_names=LABELS, on_epoch_end=remember
    )
    assert report.epochs == 5
    assert report.best_epoch == 2
    state = model.state()
    assert all(np.array_equal(state[k], snapshots[2][k]) for k in state)
    assert not all(np.array_equal(state[k], snapshots[5][k]) for k in state)


def test_single_epoch(splits, split_vocab):
    config = TestingConfig.train_config(max_epochs=1, patience=3)
    _, report = train(splits[0][::8], splits[1][::4], config, vocab=split_vocab, label_names=LABELS)
    assert report.epochs == 1
    assert len(report.history) == 1
    entry = report.history[0]
    assert set(entry) == {"epoch", "train_loss", "val_loss", "train_acc", "val_acc"}
    assert 0.0 <= entry["train_acc"] <= 1.0 and 0.0 <= entry["val_acc"] <= 1.0


def test_frozen_parameters_unchanged(splits, split_vocab):
    """Test a frozen-byte digest before and after more than 100 SGD steps"""
    config = TestingConfig.train_config(max_epochs=7, patience=7)
    fitted = training._fit_config(config, split_vocab, LABELS)
    before = HierarchicalClassifier(fitted.model, Rng(fitted.seed))
    assert fitted.model.encoder.freeze_below == fitted.model.encoder.num_layers - 1

    model, report = train(splits[0], splits[1], config, vocab=split_vocab, label_names=LABELS)
    assert report.epochs * -(-len(splits[0]) // config.batch_size) >= 100
    assert frozen_digest(model) == frozen_digest(before)

    changed = [
        name for (name, p), q in zip(model.named_parameters(), before.parameters())
        if p.trainable and not np.array_equal(p.values, q.values)
    ]
    assert changed


def test_learns_separable_data(trained, splits, split_vocab):
    """Test >= 95% train accuracy and a 10-point lead over the majority baseline"""
    model, report = trained
    assert report.epochs <= 30
    assert accuracy(model, splits[0], split_vocab) >= 0.95
    assert report.history[report.best_epoch - 1]["train_acc"] >= 0.95
    baseline = majority_baseline([e.label for e in splits[2]])
    assert accuracy(model, splits[2], split_vocab) >= baseline + 0.10


def test_report_fields(trained):
    _, report = trained
    assert 0 <= report.precision <= 1 and 0 <= report.f1 <= 1
    assert report.trainable_params <= report.total_params
    assert report.time_seconds > 0
    data = report.to_dict()
    assert set(data) == {
        "precision", "recall", "f1", "time_seconds", "total_params", "trainable_params", "epochs", "size_bytes"
    }
    json.dumps(data)


def test_report_text_table():
    report = ExperimentReport(0.5, 0.25, 0.3, 12.34, 1234567, 890, 4, 2048)
    header, row = report.to_text().splitlines()
    for title in ("Precision", "Recall", "F1-score", "Time", "Total params", "Trainable Params", "Epoch", "Size"):
        assert title in header
    assert "1,234,567" in row and "12.3s" in row and "0.5000" in row


def test_experiment_report_from_parts(trained, splits, split_vocab):
    model, _ = trained
    metrics = evaluate(model, splits[2], split_vocab, max_len=64)
    run = training.TrainingRun(epochs=3, best_epoch=2, time_seconds=1.5, history=[0.9, 0.7, 0.8])
    report = training.experiment_report(model, run, metrics, size_bytes=4096)
    assert (report.precision, report.recall, report.f1) == (
        metrics.precision_weighted, metrics.recall_weighted, metrics.f1_weighted
    )
    assert (report.total_params, report.trainable_params) == count_params(model)
    assert (report.epochs, report.best_epoch, report.size_bytes) == (3, 2, 4096)
    assert training.experiment_report(model, run, metrics, size_bytes=4096) == report


def test_evaluate_is_deterministic(trained, splits, split_vocab):
    model, _ = trained
    first = evaluate(model, splits[2], split_vocab, max_len=64)
    assert evaluate(model, splits[2], split_vocab, max_len=64) == first


def test_evaluate_constant_model(tiny_model_config, split_vocab):
    """Test that a model always predicting class 0 scores 1 on an all-zero split"""
    config = copy.deepcopy(tiny_model_config)
    config.encoder.vocab_size = len(split_vocab)
    model = HierarchicalClassifier(config, Rng(0))
    model.head.W.values = np.zeros(model.head.W.shape)
    model.head.b.values = np.array([5.0, 0.0, 0.0])
    examples = [e for e in synthetic_examples(per_class=5) if e.label == 0]
    assert evaluate(model, examples, split_vocab, max_len=16).accuracy == 1.0


def test_evaluate_empty(tiny_model_config, split_vocab):
    with pytest.raises(DataError):
        evaluate(HierarchicalClassifier(tiny_model_config, Rng(0)), [], split_vocab)


def test_untrained_model_scores_chance(tiny_model_config, split_vocab):
    """Test that accuracy stays within three binomial deviations of 1/m when labels ignore the text"""
    config = copy.deepcopy(tiny_model_config)
    config.encoder.vocab_size = len(split_vocab)
    config.num_labels = 4
    model = HierarchicalClassifier(config, Rng(3))
    texts = [e.text for e in synthetic_examples()]
    order = Rng(11).permutation(len(texts))
    examples = [Example(text=texts[j], label=i % 4) for i, j in enumerate(order)]
    score = evaluate(model, examples, split_vocab, max_len=16).accuracy
    sigma = math.sqrt(0.25 * 0.75 / len(examples))
    assert abs(score - 0.25) <= 3 * sigma


def test_seeded_runs_report_identically(splits, split_vocab):
    """Test that two runs with one seed differ only in wall time"""
    config = TestingConfig.train_config(max_epochs=3, patience=3)
    reports = [
        train(
            splits[0][::8], splits[1][::4], config, vocab=split_vocab, label_names=LABELS,
            test_examples=splits[2][::4],
        )[1]
        for _ in range(2)
    ]
    first, second = (dataclasses.replace(r, time_seconds=0.0) for r in reports)
    assert first == second
    assert first.history == second.history


def test_train_requires_both_splits(splits, split_vocab):
    with pytest.raises(DataError):
        train(splits[0], [], TestingConfig.train_config(), vocab=split_vocab, label_names=LABELS)


def test_divergence_is_reported(monkeypatch, splits, split_vocab):
    config = TestingConfig.train_config(max_epochs=2)
    real_loss = HierarchicalClassifier.loss

    def exploding(self, batch, labels):
        value = real_loss(self, batch, labels)
        value.values = np.array(np.nan)
        return value

    monkeypatch.setattr(HierarchicalClassifier, "loss", exploding)
    with pytest.raises(TrainingDivergedError) as info:
        train(splits[0][::8], splits[1][::4], config, vocab=split_vocab, label_names=LABELS)
    assert info.value.epoch == 1 and info.value.batch == 1


CONFIG_MATRIX = [
    dict(mode="token-sequence", bidirectional=False, head_hidden=0, num_layers=2, freeze_below=1),
    dict(mode="token-sequence", bidirectional=True, head_hidden=0, num_layers=3, freeze_below=0),
    dict(mode="cls-ladder", bidirectional=False, head_hidden=6, num_layers=2, freeze_below=2),
    dict(mode="cls-ladder", bidirectional=True, head_hidden=0, num_layers=1, freeze_below=1),
    dict(mode="encoder-only", bidirectional=False, head_hidden=0, num_layers=2, freeze_below=1),
    dict(mode="token-sequence", bidirectional=False, head_hidden=4, num_layers=0, freeze_below=0),
]


@pytest.mark.parametrize("settings", CONFIG_MATRIX)
def test_count_params_matches_closed_form(settings):
    config = ModelConfig(
        encoder=EncoderConfig(
            num_layers=settings["num_layers"], hidden=8, heads=2, ff_width=12, vocab_size=25,
            max_positions=9, freeze_below=settings["freeze_below"],
        ),
        fusion=FusionConfig(mode=settings["mode"], bidirectional=settings["bidirectional"]),
        word_hidden=3,
        sentence_hidden=5,
        num_labels=4,
        head_hidden=settings["head_hidden"],
    )
    assert count_params(create_model(config)) == closed_form_counts(config)
    assert count_params(create_model(config, seed=1)) == closed_form_counts(config)


def test_small_counts():
    """Test a 10 x 4 embedding table and the n=3, k=2 LSTM cell"""
    assert count_params(Embedding(10, 4, Rng(0))) == (40, 40)
    assert count_params(LSTMCell(3, 2, Rng(0))) == (48, 48)


def test_pretrained_scale_anchors():
    """Test base-shaped and distil-shaped totals and their ratio"""
    base, _ = count_params(create_model(BaseConfig.train_config().model))
    distil, _ = count_params(create_model(DistilConfig.train_config().model))
    assert abs(base - 109_247_003) / 109_247_003 <= 0.03
    assert abs(distil - 66_127_643) / 66_127_643 <= 0.03
    assert 0.55 <= distil / base <= 0.65


def test_trainable_count_independent_of_depth():
    base = create_model(BaseConfig.train_config().model)
    distil = create_model(DistilConfig.train_config().model)
    assert count_params(base)[1] == count_params(distil)[1]
    assert count_params(base)[1] < count_params(distil)[0]

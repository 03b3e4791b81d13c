"""
Training loop with validation early stopping, evaluation, parameter
accounting and experiment reports
"""
import copy
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from shorttext.data import batches
from shorttext.errors import DataError, TrainingDivergedError
from shorttext.metrics import confusion, weighted_metrics
from shorttext.models import HierarchicalClassifier
from shorttext.nn import SGD, Rng, Tape, backward
from shorttext.schemas import ExperimentReportSchema
from shorttext.text import build_vocab, encode_batch, encode_text

logger = logging.getLogger(__name__)


class EarlyStopping:
    """Stop after ``patience`` consecutive epochs without a strictly lower loss"""

    def __init__(self, patience=3):
        self.patience = patience
        self.best_loss = math.inf
        self.best_epoch = 0
        self.bad_epochs = 0

    def update(self, epoch, loss):
        """Record one epoch's validation loss; True when training should stop"""
        if loss < self.best_loss:
            self.best_loss = loss
            self.best_epoch = epoch
            self.bad_epochs = 0
            return False
        self.bad_epochs += 1
        return self.bad_epochs >= self.patience

    @property
    def improved(self):
        return self.bad_epochs == 0


@dataclass
class TrainingRun:
    epochs: int = 0
    best_epoch: int = 0
    best_loss: float = math.inf
    time_seconds: float = 0.0
    stopped_early: bool = False
    history: list = field(default_factory=list)


@dataclass
class ExperimentReport:
    """One results row: test metrics, wall time, parameter counts, epochs, size"""
    precision: float
    recall: float
    f1: float
    time_seconds: float
    total_params: int
    trainable_params: int
    epochs: int
    size_bytes: int
    best_epoch: int = 0
    history: list = field(default_factory=list, repr=False)

    COLUMNS = (
        ("Precision", "precision", "{:.4f}"),
        ("Recall", "recall", "{:.4f}"),
        ("F1-score", "f1", "{:.4f}"),
        ("Time", "time_seconds", "{:.1f}s"),
        ("Total params", "total_params", "{:,}"),
        ("Trainable Params", "trainable_params", "{:,}"),
        ("Epoch", "epochs", "{}"),
        ("Size", "size_bytes", "{:,}"),
    )

    def to_dict(self):
        return ExperimentReportSchema().dump(self)

    def to_text(self):
        """Header line and one row, columns padded to a common width"""
        cells = [fmt.format(getattr(self, attr)) for _, attr, fmt in self.COLUMNS]
        widths = [max(len(title), len(cell)) for (title, _, _), cell in zip(self.COLUMNS, cells)]
        header = "  ".join(title.ljust(w) for (title, _, _), w in zip(self.COLUMNS, widths))
        row = "  ".join(cell.ljust(w) for cell, w in zip(cells, widths))
        return f"{header}\n{row}\n"


def prepare(examples, vocab, max_len):
    """Tokenize once: (TokenizedText, label) pairs"""
    return [(encode_text(e.text, vocab, max_len=max_len), e.label) for e in examples]


def _encode(chunk, max_len):
    return encode_batch([tokens for tokens, _ in chunk], max_len=max_len), [label for _, label in chunk]


def validation_loss(model, prepared, batch_size, max_len):
    """Example-weighted mean loss over ``prepared``, no tape"""
    total, count = 0.0, 0
    for chunk in batches(prepared, batch_size):
        batch, labels = _encode(chunk, max_len)
        total += model.loss(batch, labels).item() * len(chunk)
        count += len(chunk)
    return total / count


def prepared_accuracy(model, prepared, batch_size, max_len):
    """Fraction of ``prepared`` whose argmax label is correct, no tape"""
    correct = 0
    for chunk in batches(prepared, batch_size):
        batch, labels = _encode(chunk, max_len)
        predicted, _ = model.predict(batch)
        correct += int(np.sum(np.atleast_1d(predicted) == np.asarray(labels)))
    return correct / len(prepared)


def _fit_config(config, vocab, label_names):
    """Copy of ``config`` whose table sizes follow the vocabulary and label set"""
    config = copy.deepcopy(config)
    encoder = config.model.encoder
    if encoder.vocab_size != len(vocab):
        logger.info("embedding table resized from %d to %d rows", encoder.vocab_size, len(vocab))
        encoder.vocab_size = len(vocab)
    if label_names is not None and config.model.num_labels != len(label_names):
        config.model.num_labels = len(label_names)
    return config.validate()


def train(
    train_examples,
    val_examples,
    config,
    vocab=None,
    label_names=None,
    test_examples=None,
    checkpoint_path=None,
    on_epoch_end=None,
):
    """Mini-batch SGD with early stopping; returns (model, ExperimentReport)

    The best epoch's parameters are restored before returning. Metrics
    come from ``test_examples`` when given, else from the validation split.
    """
    if not train_examples or not val_examples:
        raise DataError("training needs non-empty train and validation splits")
    if vocab is None:
        vocab = build_vocab(
            [e.text for e in train_examples], max_size=config.vocab_max_size, min_freq=config.vocab_min_freq
        )
    config = _fit_config(config, vocab, label_names)

    rng = Rng(config.seed)
    model = HierarchicalClassifier(config.model, rng)
    trainable = [p for p in model.parameters() if p.trainable]
    optimizer = SGD(trainable, config.learning_rate, clip_norm=config.clip_norm)

    train_data = prepare(train_examples, vocab, config.max_len)
    val_data = prepare(val_examples, vocab, config.max_len)

    stopper = EarlyStopping(config.patience)
    run = TrainingRun()
    best_state = model.state()
    started = time.monotonic()
    for epoch in range(1, config.max_epochs + 1):
        seen, total = 0, 0.0
        for index, chunk in enumerate(batches(train_data, config.batch_size, shuffle_seed=rng.fork(epoch).seed)):
            batch, labels = _encode(chunk, config.max_len)
            with Tape() as tape:
                tape.watch(trainable)
                loss = model.loss(batch, labels)
            value = loss.item()
            if not np.isfinite(value):
                raise TrainingDivergedError(epoch, index + 1, value)
            backward(loss, tape)
            optimizer.step()
            total += value * len(chunk)
            seen += len(chunk)

        train_loss = total / seen
        val_loss = validation_loss(model, val_data, config.batch_size, config.max_len)
        stop = stopper.update(epoch, val_loss)
        if stopper.improved:
            best_state = model.state()
        run.epochs = epoch
        train_acc = prepared_accuracy(model, train_data, config.batch_size, config.max_len)
        val_acc = prepared_accuracy(model, val_data, config.batch_size, config.max_len)
        run.history.append(
            {
                "epoch": epoch,
                "train_loss": train_loss,
                "val_loss": val_loss,
                "train_acc": train_acc,
                "val_acc": val_acc,
            }
        )
        logger.info(
            "epoch %d: train loss %.6f acc %.4f, val loss %.6f acc %.4f, best epoch %d, patience %d/%d",
            epoch, train_loss, train_acc, val_loss, val_acc, stopper.best_epoch, stopper.bad_epochs,
            config.patience,
        )
        if on_epoch_end is not None:
            on_epoch_end(epoch, train_loss, val_loss, model)
        if stop:
            run.stopped_early = True
            logger.info("early stopping after epoch %d; restoring epoch %d", epoch, stopper.best_epoch)
            break
    run.time_seconds = time.monotonic() - started

    model.load_state(best_state)
    run.best_epoch = stopper.best_epoch
    run.best_loss = stopper.best_loss

    scored = test_examples if test_examples else val_examples
    metrics = evaluate(model, scored, vocab, batch_size=config.batch_size, max_len=config.max_len)

    size_bytes = 0
    if checkpoint_path is not None:
        from shorttext.checkpoint import save_checkpoint

        size_bytes = save_checkpoint(
            model, checkpoint_path, vocab=vocab, label_names=label_names, run=run, train_config=config
        )
    return model, experiment_report(model, run, metrics, size_bytes=size_bytes)


def predict_texts(model, texts, vocab, batch_size=32, max_len=128):
    """(labels, probability rows) for raw texts"""
    encoded = [encode_text(text, vocab, max_len=max_len) for text in texts]
    labels, probs = [], []
    for start in range(0, len(encoded), batch_size):
        batch = encode_batch(encoded[start:start + batch_size], max_len=max_len)
        chunk_labels, chunk_probs = model.predict(batch)
        labels.extend(np.atleast_1d(chunk_labels).tolist())
        probs.extend(chunk_probs.tolist())
    return labels, probs


def evaluate(model, examples, vocab, batch_size=32, max_len=128, beta=1.0):
    """Forward pass, argmax labels, weighted metrics"""
    if not examples:
        raise DataError("cannot evaluate on an empty split")
    predicted, _ = predict_texts(model, [e.text for e in examples], vocab, batch_size, max_len)
    cm = confusion([e.label for e in examples], predicted, model.config.num_labels)
    return weighted_metrics(cm, beta=beta)


def count_params(model):
    """(total, trainable) entry counts"""
    total = trainable = 0
    for p in model.parameters():
        n = math.prod(p.shape)
        total += n
        if p.trainable:
            trainable += n
    return total, trainable


def _embedding_count(e):
    d = e.hidden
    segments = e.num_segments * d if e.segment_embeddings else 0
    return e.vocab_size * d + e.max_positions * d + segments + 2 * d


def _block_count(e):
    d, f = e.hidden, e.ff_width
    return (4 * d * d + 4 * d) + (2 * d * f + f + d) + 4 * d


def _lstm_count(n, k, bidirectional):
    cell = 4 * (n * k + k * k + k)
    return 2 * cell if bidirectional else cell


def closed_form_counts(config):
    """(total, trainable) from the architecture formulas alone"""
    e, fusion = config.encoder, config.fusion
    frozen = 0 if e.freeze_below == 0 else _embedding_count(e)
    frozen += e.freeze_below * _block_count(e)
    total = _embedding_count(e) + e.num_layers * _block_count(e)

    width = 2 if fusion.bidirectional else 1
    if fusion.mode == "encoder-only":
        total += e.hidden * config.num_labels
        return total, total - frozen

    sentence_in = e.hidden
    if fusion.mode == "token-sequence":
        total += _lstm_count(e.hidden, config.word_hidden, fusion.bidirectional)
        sentence_in += width * config.word_hidden
    total += _lstm_count(sentence_in, config.sentence_hidden, fusion.bidirectional)

    pooled = width * config.sentence_hidden
    if config.head_hidden:
        total += pooled * config.head_hidden + config.head_hidden
        pooled = config.head_hidden
    total += pooled * config.num_labels + config.num_labels
    return total, total - frozen


def experiment_report(model, timings, metrics, size_bytes=0):
    total, trainable = count_params(model)
    return ExperimentReport(
        precision=metrics.precision_weighted,
        recall=metrics.recall_weighted,
        f1=metrics.f1_weighted,
        time_seconds=timings.time_seconds,
        total_params=total,
        trainable_params=trainable,
        epochs=timings.epochs,
        size_bytes=size_bytes,
        best_epoch=timings.best_epoch,
        history=list(timings.history),
    )

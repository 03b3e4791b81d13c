"""
Command-line interface: data preparation, training, evaluation, accounting
"""
import json
import os

import click

from shorttext.checkpoint import load_checkpoint, restore_model
from shorttext.config import SEED_ENV, apply_env_overrides, get_preset, load_run_config
from shorttext.data import (
    SplitSpec,
    load_csv,
    load_split,
    stratified_split,
    stratified_subsample,
    write_csv,
    write_split,
)
from shorttext.errors import CheckpointError, ConfigError, DataError
from shorttext.extensions import configure_logging
from shorttext.metrics import majority_baseline
from shorttext.models import HierarchicalClassifier
from shorttext.schemas import MetricsReportSchema
from shorttext.text import Vocabulary, build_vocab
from shorttext.training import (
    ExperimentReport,
    closed_form_counts,
    count_params,
    evaluate,
    predict_texts,
    train,
)
from shorttext.utils.decorators import cli_errors

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


def emit(data):
    """Machine-readable output on standard output"""
    click.echo(json.dumps(data, indent=2, sort_keys=True))


def resolve_seed(seed, default=42):
    if seed is not None:
        return seed
    raw = os.getenv(SEED_ENV)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}", {SEED_ENV: raw}) from None


def read_train_config(config_path, preset):
    if config_path:
        return load_run_config(config_path, preset=preset)
    return apply_env_overrides(get_preset(preset).train_config()).validate()


def read_corpus(path):
    """Texts from a CSV with a text column, or one text per line otherwise"""
    if path.lower().endswith(".csv"):
        examples, _ = load_csv(path)
        return [e.text for e in examples]
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return [line.rstrip("\n") for line in fh if line.strip()]
    except OSError as e:
        raise DataError(f"cannot read corpus {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise DataError(f"corpus {path} is not valid UTF-8: {e}") from e


def open_checkpoint(path, vocab_path=None):
    """(model, vocabulary, label names, checkpoint) for a checkpoint and its vocabulary file"""
    checkpoint = load_checkpoint(path)
    vocab = Vocabulary.load(vocab_path or f"{path}.vocab")
    if checkpoint.vocab_hash and checkpoint.vocab_hash != vocab.digest():
        raise CheckpointError("vocabulary file does not match the checkpoint's vocabulary hash")
    labels = checkpoint.label_names or [str(i) for i in range(checkpoint.config.num_labels)]
    return restore_model(checkpoint), vocab, labels, checkpoint


def max_len_of(checkpoint):
    flat = checkpoint.train_config or {}
    return flat.get("max_len", checkpoint.config.encoder.max_positions)


@click.group()
@click.option(
    "--log-level",
    default=lambda: os.getenv("SHORTTEXT_LOG_LEVEL", "INFO"),
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    show_default="SHORTTEXT_LOG_LEVEL or INFO",
    help="Logging level for messages on standard error",
)
def cli(log_level):
    """Hierarchical short-text classifier"""
    configure_logging(log_level)


@click.command("build-vocab")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(dir_okay=False), help="CSV or text file")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Vocabulary file to write")
@click.option("--max-size", default=30000, show_default=True, help="Maximum vocabulary size")
@click.option("--min-freq", default=1, show_default=True, help="Minimum word count")
@cli_errors
def build_vocab_command(corpus_path, out, max_size, min_freq):
    """Build a vocabulary file from a corpus"""
    vocab = build_vocab(read_corpus(corpus_path), max_size=max_size, min_freq=min_freq)
    vocab.save(out)
    click.echo(f"Wrote {len(vocab)} tokens to {out}", err=True)


@click.command("split")
@click.option("--csv", "csv_path", required=True, type=click.Path(dir_okay=False), help="Input CSV")
@click.option("--out", required=True, type=click.Path(file_okay=False), help="Output directory")
@click.option("--fractions", default="0.64,0.16,0.20", show_default=True, help="train,val,test fractions")
@click.option("--seed", type=int, default=None, help=f"Shuffle seed (default: {SEED_ENV} or 42)")
@click.option("--subsample", type=float, default=None, help="Stratified subsample fraction applied first")
@cli_errors
def split_command(csv_path, out, fractions, seed, subsample):
    """Stratified train/val/test split with a manifest"""
    spec = SplitSpec.parse(fractions, seed=resolve_seed(seed))
    examples, labels = load_csv(csv_path)
    if subsample is not None:
        examples = stratified_subsample(examples, subsample, seed=spec.seed)
    splits = stratified_split(examples, spec)
    write_split(out, splits, labels, spec, subsample_fraction=subsample, source=os.path.basename(csv_path))
    click.echo(f"Split {len(examples)} rows into {' / '.join(str(len(s)) for s in splits)}", err=True)


@click.command("subsample")
@click.option("--csv", "csv_path", required=True, type=click.Path(dir_okay=False), help="Input CSV")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output CSV")
@click.option("--fraction", default=0.05, show_default=True, help="Fraction kept per class")
@click.option("--seed", type=int, default=None, help=f"Sampling seed (default: {SEED_ENV} or 42)")
@cli_errors
def subsample_command(csv_path, out, fraction, seed):
    """Stratified per-class subsample"""
    examples, labels = load_csv(csv_path)
    kept = stratified_subsample(examples, fraction, seed=resolve_seed(seed))
    write_csv(out, kept, labels)
    click.echo(f"Kept {len(kept)} of {len(examples)} rows", err=True)


@click.command("train")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="RunConfigFile")
@click.option("--preset", default=None, help="Preset for unset keys (default: SHORTTEXT_CONFIG or desk)")
@click.option("--data", "data_dir", required=True, type=click.Path(file_okay=False), help="Split directory")
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Checkpoint to write")
@cli_errors
def train_command(config_path, preset, data_dir, out):
    """Train, save the checkpoint, vocabulary and report"""
    config = read_train_config(config_path, preset)
    (train_examples, val_examples, test_examples), labels = load_split(data_dir)
    vocab = build_vocab(
        [e.text for e in train_examples], max_size=config.vocab_max_size, min_freq=config.vocab_min_freq
    )
    vocab.save(f"{out}.vocab")
    _, report = train(
        train_examples,
        val_examples,
        config,
        vocab=vocab,
        label_names=labels,
        test_examples=test_examples,
        checkpoint_path=out,
    )
    data = report.to_dict()
    data["best_epoch"] = report.best_epoch
    data["history"] = report.history
    report_path = f"{out}.report.json"
    try:
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
    except OSError as e:
        raise DataError(f"cannot write report {report_path}: {e}") from e
    click.echo(report.to_text(), err=True)
    emit(report.to_dict())


@click.command("evaluate")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(dir_okay=False))
@click.option("--split", "split_path", required=True, type=click.Path(dir_okay=False), help="CSV to score")
@click.option("--vocab", "vocab_path", default=None, help="Vocabulary file (default: <checkpoint>.vocab)")
@click.option("--confusion", is_flag=True, help="Include the confusion matrix")
@cli_errors
def evaluate_command(checkpoint_path, split_path, vocab_path, confusion):
    """Weighted metrics of a checkpoint on a split, as JSON"""
    model, vocab, labels, checkpoint = open_checkpoint(checkpoint_path, vocab_path)
    examples, _ = load_csv(split_path, labels=labels)
    report = evaluate(model, examples, vocab, max_len=max_len_of(checkpoint))
    emit(MetricsReportSchema().dump(report.to_dict(include_confusion=confusion)))


@click.command("predict")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(dir_okay=False))
@click.option("--text", required=True, help="Text to classify")
@click.option("--vocab", "vocab_path", default=None, help="Vocabulary file (default: <checkpoint>.vocab)")
@cli_errors
def predict_command(checkpoint_path, text, vocab_path):
    """Label name and probability vector for one text"""
    model, vocab, labels, checkpoint = open_checkpoint(checkpoint_path, vocab_path)
    predicted, probs = predict_texts(model, [text], vocab, max_len=max_len_of(checkpoint))
    emit({"label": labels[predicted[0]], "label_id": predicted[0], "probabilities": probs[0]})


@click.command("param-count")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="RunConfigFile")
@click.option("--preset", default=None, help="Preset for unset keys (default: SHORTTEXT_CONFIG or desk)")
@cli_errors
def param_count_command(config_path, preset):
    """Total and trainable parameters, without allocating weights"""
    config = read_train_config(config_path, preset)
    total, trainable = count_params(HierarchicalClassifier(config.model))
    expected_total, expected_trainable = closed_form_counts(config.model)
    if (total, trainable) != (expected_total, expected_trainable):
        click.echo(
            f"Warning: module count {total}/{trainable} differs from closed form "
            f"{expected_total}/{expected_trainable}",
            err=True,
        )
    emit({"total_params": total, "trainable_params": trainable, "mode": config.model.fusion.mode})


@click.command("report")
@click.option("--checkpoint", "checkpoint_path", required=True, type=click.Path(dir_okay=False))
@click.option("--split", "split_path", required=True, type=click.Path(dir_okay=False), help="CSV to score")
@click.option("--vocab", "vocab_path", default=None, help="Vocabulary file (default: <checkpoint>.vocab)")
@click.option("--json", "as_json", is_flag=True, help="Print the JSON record instead of the table")
@click.option("--confusion", is_flag=True, help="Also print the confusion matrix")
@cli_errors
def report_command(checkpoint_path, split_path, vocab_path, as_json, confusion):
    """Results row for a checkpoint on a split"""
    model, vocab, labels, checkpoint = open_checkpoint(checkpoint_path, vocab_path)
    examples, _ = load_csv(split_path, labels=labels)
    metrics = evaluate(model, examples, vocab, max_len=max_len_of(checkpoint))
    total, trainable = count_params(model)

    time_seconds = 0.0
    saved = f"{checkpoint_path}.report.json"
    if os.path.exists(saved):
        try:
            with open(saved, "r", encoding="utf-8") as fh:
                time_seconds = float(json.load(fh).get("time_seconds", 0.0))
        except (OSError, ValueError) as e:
            raise DataError(f"cannot read saved report {saved}: {e}") from e

    report = ExperimentReport(
        precision=metrics.precision_weighted,
        recall=metrics.recall_weighted,
        f1=metrics.f1_weighted,
        time_seconds=time_seconds,
        total_params=total,
        trainable_params=trainable,
        epochs=checkpoint.epochs,
        size_bytes=os.path.getsize(checkpoint_path),
        best_epoch=checkpoint.best_epoch,
    )
    if as_json:
        emit(report.to_dict())
    else:
        click.echo(report.to_text(), nl=False)
    baseline = majority_baseline([e.label for e in examples])
    click.echo(f"Accuracy {metrics.accuracy:.4f} vs majority baseline {baseline:.4f}", err=True)
    if confusion:
        for row in metrics.confusion:
            click.echo(" ".join(f"{count:5d}" for count in row), err=True)


@click.command("run-tests")
@click.option("--coverage", is_flag=True, help="Run tests with coverage report")
@click.option("--verbose", is_flag=True, help="Run tests in verbose mode")
@click.pass_context
def run_tests(ctx, coverage, verbose):
    """Run the test suite"""
    import pytest

    args = []
    if verbose:
        args.append("-v")

    if coverage:
        args.extend(["--cov=shorttext", "--cov-report=term", "--cov-report=html"])

    click.echo("Running tests...", err=True)
    result = pytest.main(args)

    if result == 0:
        click.echo("All tests passed!", err=True)
    else:
        click.echo("Tests failed!", err=True)
    ctx.exit(int(result))


def register_commands(group):
    """Register every subcommand with the CLI group"""
    group.add_command(build_vocab_command)
    group.add_command(split_command)
    group.add_command(subsample_command)
    group.add_command(train_command)
    group.add_command(evaluate_command)
    group.add_command(predict_command)
    group.add_command(param_count_command)
    group.add_command(report_command)
    group.add_command(run_tests)
    return group

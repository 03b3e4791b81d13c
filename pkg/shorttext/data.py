"""
CSV ingestion, stratified splitting and subsampling, batch iteration
"""
import json
import logging
import math
import os
from collections import defaultdict
from dataclasses import dataclass

import pandas as pd
from marshmallow import ValidationError

from shorttext.errors import DataError
from shorttext.nn.rng import Rng
from shorttext.schemas import SplitManifestSchema

logger = logging.getLogger(__name__)

TEXT_COLUMN = "text"
LABEL_COLUMN = "category"
SPLIT_NAMES = ("train", "val", "test")
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class Example:
    text: str
    label: int


@dataclass(frozen=True)
class SplitSpec:
    fractions: tuple = (0.64, 0.16, 0.20)
    seed: int = 42

    def __post_init__(self):
        if len(self.fractions) != 3 or any(f < 0 for f in self.fractions):
            raise DataError(f"split needs three non-negative fractions, got {self.fractions}")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise DataError(f"split fractions must sum to 1, got {sum(self.fractions)}")

    @classmethod
    def parse(cls, text, seed=42):
        """'0.64,0.16,0.20' -> SplitSpec"""
        try:
            fractions = tuple(float(part) for part in text.split(","))
        except ValueError:
            raise DataError(f"fractions must be comma-separated numbers, got {text!r}") from None
        return cls(fractions=fractions, seed=seed)


def _column_map(columns, path):
    names = {str(name).strip().lower(): name for name in columns}
    missing = [c for c in (TEXT_COLUMN, LABEL_COLUMN) if c not in names]
    if missing:
        raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
    return names[TEXT_COLUMN], names[LABEL_COLUMN]


def read_frame(path):
    """The CSV as a DataFrame of strings; missing cells are empty strings"""
    try:
        frame = pd.read_csv(path, encoding="utf-8", dtype=str, keep_default_na=False, index_col=False)
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise DataError(f"{path}: not valid UTF-8: {e}") from e
    except pd.errors.EmptyDataError:
        raise DataError(f"{path}: file is empty, expected a header row") from None
    except pd.errors.ParserError as e:
        raise DataError(f"{path}: malformed CSV: {e}") from e
    return frame.fillna("")


def load_csv(path, labels=None):
    """Read (text, category) rows

    Label names get dense ids in first-appearance order, or the ids of a
    given ``labels`` table. Returns (examples, label_names).
    """
    names = list(labels or [])
    ids = {name: i for i, name in enumerate(names)}
    fixed = labels is not None
    frame = read_frame(path)
    text_col, label_col = _column_map(frame.columns, path)

    examples, empty = [], []
    for index, text, name in zip(frame.index, frame[text_col], frame[label_col]):
        row_number = int(index) + 2
        name = name.strip()
        if not text.strip():
            empty.append(row_number)
            continue
        if name not in ids:
            if fixed:
                raise DataError(f"{path}: row {row_number} has unknown category {name!r}")
            ids[name] = len(names)
            names.append(name)
        examples.append(Example(text=text, label=ids[name]))

    if empty:
        raise DataError(f"{path}: empty text in row(s) {', '.join(str(n) for n in empty)}")
    logger.info("loaded %d examples over %d labels from %s", len(examples), len(names), path)
    return examples, names


def write_csv(path, examples, label_names):
    frame = pd.DataFrame(
        {
            TEXT_COLUMN: [example.text for example in examples],
            LABEL_COLUMN: [label_names[example.label] for example in examples],
        },
        columns=[TEXT_COLUMN, LABEL_COLUMN],
    )
    try:
        frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n")
    except OSError as e:
        raise DataError(f"cannot write {path}: {e}") from e


def _by_class(examples):
    groups = defaultdict(list)
    for index, example in enumerate(examples):
        groups[example.label].append(index)
    return groups


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def split_counts(n, fractions):
    """Per-class (train, val, test) sizes: nearest rounding, train first, totals preserved"""
    train = min(_round_half_up(fractions[0] * n), n)
    val = min(_round_half_up(fractions[1] * n), n - train)
    return train, val, n - train - val


def stratified_split(examples, spec=None):
    """Per-class seeded shuffle, then train/val/test allocation"""
    spec = spec or SplitSpec()
    examples = list(examples)
    if not examples:
        raise DataError("cannot split an empty dataset")

    rng = Rng(spec.seed)
    parts = ([], [], [])
    groups = _by_class(examples)
    for label in sorted(groups):
        indices = groups[label]
        order = [indices[i] for i in rng.permutation(len(indices))]
        train, val, _ = split_counts(len(indices), spec.fractions)
        parts[0].extend(order[:train])
        parts[1].extend(order[train:train + val])
        parts[2].extend(order[train + val:])

    train, val, test = ([examples[i] for i in sorted(part)] for part in parts)
    logger.info("split %d examples into %d/%d/%d", len(examples), len(train), len(val), len(test))
    return train, val, test


def stratified_subsample(examples, fraction=0.05, seed=42):
    """ceil(fraction * n_c) examples per class, drawn without replacement"""
    if not 0 < fraction <= 1:
        raise DataError(f"fraction must lie in (0, 1], got {fraction}")
    examples = list(examples)
    rng = Rng(seed)
    keep = []
    groups = _by_class(examples)
    for label in sorted(groups):
        indices = groups[label]
        take = min(len(indices), math.ceil(fraction * len(indices) - 1e-9))
        chosen = rng.choice(len(indices), take, replace=False)
        keep.extend(indices[i] for i in chosen)
    return [examples[i] for i in sorted(keep)]


def batches(examples, batch_size, shuffle_seed=None):
    """Yield lists of at most ``batch_size`` examples, the last one possibly short"""
    if batch_size < 1:
        raise DataError(f"batch_size must be at least 1, got {batch_size}")
    examples = list(examples)
    order = range(len(examples))
    if shuffle_seed is not None:
        order = Rng(shuffle_seed).permutation(len(examples))
    order = list(order)
    for start in range(0, len(order), batch_size):
        yield [examples[i] for i in order[start:start + batch_size]]


def write_split(out_dir, splits, label_names, spec, subsample_fraction=None, source=None):
    """Write train/val/test CSVs and the JSON manifest to ``out_dir``"""
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as e:
        raise DataError(f"cannot create split directory {out_dir}: {e}") from e
    for name, part in zip(SPLIT_NAMES, splits):
        write_csv(os.path.join(out_dir, f"{name}.csv"), part, label_names)
    manifest = SplitManifestSchema().dump(
        {
            "seed": spec.seed,
            "fractions": list(spec.fractions),
            "labels": list(label_names),
            "counts": {name: len(part) for name, part in zip(SPLIT_NAMES, splits)},
            "subsample_fraction": subsample_fraction,
            "order": "subsample-then-split",
            "source": source,
        }
    )
    path = os.path.join(out_dir, MANIFEST_NAME)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
    except OSError as e:
        raise DataError(f"cannot write split manifest {path}: {e}") from e
    logger.info("wrote split manifest to %s", path)
    return manifest


def read_manifest(data_dir):
    path = os.path.join(data_dir, MANIFEST_NAME)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return SplitManifestSchema().load(json.load(fh))
    except OSError as e:
        raise DataError(f"cannot read split manifest {path}: {e}") from e
    except (ValueError, ValidationError) as e:
        raise DataError(f"invalid split manifest {path}: {e}") from e


def load_split(data_dir, name=None):
    """Load one named split, or all three, with the manifest's label table"""
    labels = read_manifest(data_dir)["labels"]
    names = SPLIT_NAMES if name is None else (name,)
    parts = [load_csv(os.path.join(data_dir, f"{n}.csv"), labels=labels)[0] for n in names]
    return (parts if name is None else parts[0]), labels

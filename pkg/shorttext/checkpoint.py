"""
Binary checkpoint format

Layout, all integers little-endian:
    magic           8 bytes, b"STXCKPT\\0"
    version         uint32
    header length   uint32, then that many bytes of sorted-key JSON
    param count     uint32
    per parameter   name length uint32, utf-8 name, trainable uint8,
                    rank uint32, rank x uint32 extents, float64 data
"""
import io
import json
import logging
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from shorttext.config import ModelConfig
from shorttext.errors import CheckpointError, CheckpointVersionError
from shorttext.models import HierarchicalClassifier

logger = logging.getLogger(__name__)

MAGIC = b"STXCKPT\0"
FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (FORMAT_VERSION,)

_U32 = struct.Struct("<I")
_U8 = struct.Struct("<B")
_FLOAT = np.dtype("<f8")


@dataclass
class ParameterRecord:
    name: str
    values: np.ndarray
    trainable: bool


@dataclass
class Checkpoint:
    config: ModelConfig
    parameters: list = field(default_factory=list)
    vocab_hash: str = None
    label_names: list = None
    best_epoch: int = 0
    epochs: int = 0
    train_config: dict = None
    version: int = FORMAT_VERSION

    def header(self):
        return {
            "config": self.config.to_dict(),
            "vocab_hash": self.vocab_hash,
            "label_names": self.label_names,
            "best_epoch": self.best_epoch,
            "epochs": self.epochs,
            "train_config": self.train_config,
        }


def from_model(model, vocab=None, label_names=None, run=None, train_config=None):
    """Snapshot a model; ``run`` needs best_epoch and epochs, ``train_config`` may already be flat"""
    if train_config is not None and not isinstance(train_config, dict):
        train_config = train_config.to_flat()
    return Checkpoint(
        config=model.config,
        parameters=[
            ParameterRecord(name, p.values, p.trainable) for name, p in model.named_parameters()
        ],
        vocab_hash=vocab.digest() if vocab is not None else None,
        label_names=list(label_names) if label_names is not None else None,
        best_epoch=run.best_epoch if run is not None else 0,
        epochs=run.epochs if run is not None else 0,
        train_config=dict(train_config) if train_config is not None else None,
    )


def to_bytes(checkpoint):
    out = io.BytesIO()
    header = json.dumps(checkpoint.header(), sort_keys=True, separators=(",", ":")).encode("utf-8")
    out.write(MAGIC)
    out.write(_U32.pack(checkpoint.version))
    out.write(_U32.pack(len(header)))
    out.write(header)
    out.write(_U32.pack(len(checkpoint.parameters)))
    for record in checkpoint.parameters:
        if record.values is None:
            raise CheckpointError(f"parameter {record.name} has no values to save")
        name = record.name.encode("utf-8")
        values = np.ascontiguousarray(record.values, dtype=_FLOAT)
        out.write(_U32.pack(len(name)))
        out.write(name)
        out.write(_U8.pack(1 if record.trainable else 0))
        out.write(_U32.pack(values.ndim))
        for extent in values.shape:
            out.write(_U32.pack(extent))
        out.write(values.tobytes())
    return out.getvalue()


class _Reader:
    def __init__(self, data):
        self.data = data
        self.offset = 0

    def take(self, n, what):
        if self.offset + n > len(self.data):
            raise CheckpointError(f"checkpoint truncated while reading {what}")
        chunk = self.data[self.offset:self.offset + n]
        self.offset += n
        return chunk

    def u32(self, what):
        return _U32.unpack(self.take(_U32.size, what))[0]


def from_bytes(data):
    reader = _Reader(data)
    if reader.take(len(MAGIC), "magic") != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic bytes)")
    version = reader.u32("version")
    if version not in SUPPORTED_VERSIONS:
        raise CheckpointVersionError(version, SUPPORTED_VERSIONS)
    try:
        header = json.loads(reader.take(reader.u32("header length"), "header").decode("utf-8"))
        config = ModelConfig.from_dict(header["config"])
    except (UnicodeDecodeError, ValueError, KeyError, TypeError) as e:
        raise CheckpointError(f"corrupted checkpoint header: {e}") from e

    parameters = []
    for _ in range(reader.u32("parameter count")):
        try:
            name = reader.take(reader.u32("name length"), "name").decode("utf-8")
        except UnicodeDecodeError as e:
            raise CheckpointError(f"corrupted parameter name: {e}") from e
        trainable = _U8.unpack(reader.take(_U8.size, f"{name} flag"))[0] == 1
        shape = tuple(reader.u32(f"{name} extent") for _ in range(reader.u32(f"{name} rank")))
        count = int(np.prod(shape, dtype=np.int64))
        raw = reader.take(count * _FLOAT.itemsize, f"{name} values")
        values = np.frombuffer(raw, dtype=_FLOAT).reshape(shape).astype(np.float64)
        parameters.append(ParameterRecord(name, values, trainable))
    if reader.offset != len(data):
        raise CheckpointError(f"{len(data) - reader.offset} trailing bytes after the last parameter")

    return Checkpoint(
        config=config,
        parameters=parameters,
        vocab_hash=header.get("vocab_hash"),
        label_names=header.get("label_names"),
        best_epoch=header.get("best_epoch", 0),
        epochs=header.get("epochs", 0),
        train_config=header.get("train_config"),
        version=version,
    )


def write_checkpoint(checkpoint, path):
    """Write and return the file size in bytes"""
    data = to_bytes(checkpoint)
    try:
        with open(path, "wb") as fh:
            fh.write(data)
    except OSError as e:
        raise CheckpointError(f"cannot write checkpoint {path}: {e}") from e
    size = os.path.getsize(path)
    logger.info("saved checkpoint %s (%d bytes)", path, size)
    return size


def save_checkpoint(model, path, vocab=None, label_names=None, run=None, train_config=None):
    return write_checkpoint(from_model(model, vocab, label_names, run, train_config), path)


def load_checkpoint(path):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    checkpoint = from_bytes(data)
    logger.debug("loaded checkpoint %s: %d parameters", path, len(checkpoint.parameters))
    return checkpoint


def restore_model(checkpoint):
    """Rebuild the classifier and copy every stored tensor and trainable flag into it"""
    model = HierarchicalClassifier(checkpoint.config)
    stored = {record.name: record for record in checkpoint.parameters}
    expected = dict(model.named_parameters())
    if set(stored) != set(expected):
        missing = sorted(set(expected) - set(stored))
        extra = sorted(set(stored) - set(expected))
        raise CheckpointError(f"parameter names disagree with the config (missing {missing}, unexpected {extra})")
    for name, param in expected.items():
        record = stored[name]
        if tuple(record.values.shape) != tuple(param.shape):
            raise CheckpointError(f"{name}: stored shape {record.values.shape} != expected {param.shape}")
        param.values = record.values.copy()
        param.trainable = record.trainable
    return model

"""
Configuration settings: typed model/training configs and named presets
"""
import os
from dataclasses import asdict, dataclass, field, fields

from shorttext.errors import ConfigError

MODES = ("token-sequence", "cls-ladder", "encoder-only")
DIRECTIONS = ("forward", "backward")
LOSS_PREFACTORS = ("tags", "none")

SEED_ENV = "DBLP_SEED"


@dataclass
class EncoderConfig:
    num_layers: int = 6
    hidden: int = 64
    heads: int = 4
    ff_width: int = 256
    vocab_size: int = 1000
    max_positions: int = 128
    num_segments: int = 2
    freeze_below: int = None
    segment_embeddings: bool = True

    def __post_init__(self):
        if self.freeze_below is None:
            self.freeze_below = max(self.num_layers - 1, 0)

    def validate(self):
        if self.num_layers < 0:
            raise ConfigError("num_layers must be non-negative", {"num_layers": self.num_layers})
        if self.hidden < 1 or self.heads < 1 or self.hidden % self.heads:
            raise ConfigError(
                f"heads ({self.heads}) must divide hidden ({self.hidden})",
                {"heads": self.heads, "hidden": self.hidden},
            )
        if not 0 <= self.freeze_below <= self.num_layers:
            raise ConfigError(
                f"freeze_below must lie in [0, {self.num_layers}], got {self.freeze_below}",
                {"freeze_below": self.freeze_below},
            )
        if self.vocab_size < 4 or self.max_positions < 3 or self.num_segments < 1:
            raise ConfigError("vocab_size >= 4, max_positions >= 3 and num_segments >= 1 are required")
        return self


@dataclass
class FusionConfig:
    lam: float = 0.5
    mode: str = "token-sequence"
    word_direction: str = "forward"
    sentence_direction: str = "backward"
    bidirectional: bool = False

    def validate(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError(f"lam must lie in [0, 1], got {self.lam}", {"lam": self.lam})
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}", {"mode": self.mode})
        for name in ("word_direction", "sentence_direction"):
            if getattr(self, name) not in DIRECTIONS:
                raise ConfigError(f"{name} must be forward or backward", {name: getattr(self, name)})
        return self


@dataclass
class ModelConfig:
    encoder: EncoderConfig = field(default_factory=EncoderConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    word_hidden: int = 32
    sentence_hidden: int = 32
    num_labels: int = 2
    head_hidden: int = 0
    phi: float = 1e-5
    loss_prefactor: str = "tags"

    def validate(self):
        self.encoder.validate()
        self.fusion.validate()
        if self.word_hidden < 1 or self.sentence_hidden < 1 or self.head_hidden < 0:
            raise ConfigError("LSTM widths must be positive and head_hidden non-negative")
        if self.num_labels < 1:
            raise ConfigError("num_labels must be positive", {"num_labels": self.num_labels})
        if self.phi < 0:
            raise ConfigError(f"phi must be non-negative, got {self.phi}", {"phi": self.phi})
        if self.loss_prefactor not in LOSS_PREFACTORS:
            raise ConfigError("loss_prefactor must be 'tags' or 'none'", {"loss_prefactor": self.loss_prefactor})
        if self.fusion.mode == "cls-ladder" and self.encoder.num_layers == 0:
            raise ConfigError("cls-ladder mode needs at least one encoder layer")
        return self

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        encoder = EncoderConfig(**data.pop("encoder"))
        fusion = FusionConfig(**data.pop("fusion"))
        return cls(encoder=encoder, fusion=fusion, **data)


@dataclass
class TrainConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    learning_rate: float = 0.5
    batch_size: int = 8
    max_epochs: int = 30
    patience: int = 3
    seed: int = 42
    clip_norm: float = 5.0
    max_len: int = 128
    vocab_max_size: int = 30000
    vocab_min_freq: int = 1

    def validate(self):
        self.model.validate()
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive", {"learning_rate": self.learning_rate})
        if self.batch_size < 1:
            raise ConfigError("batch_size must be at least 1", {"batch_size": self.batch_size})
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be at least 1", {"max_epochs": self.max_epochs})
        if self.patience < 1:
            raise ConfigError("patience must be at least 1", {"patience": self.patience})
        if self.clip_norm < 0:
            raise ConfigError("clip_norm must be non-negative", {"clip_norm": self.clip_norm})
        if self.max_len < 3 or self.max_len > self.model.encoder.max_positions:
            raise ConfigError(
                f"max_len must lie in [3, max_positions={self.model.encoder.max_positions}]",
                {"max_len": self.max_len},
            )
        return self

    def to_flat(self):
        """Flat key -> value mapping, the RunConfigFile vocabulary"""
        flat = {}
        for name, (section, attr) in FLAT_KEYS.items():
            flat[name] = getattr(self._section(section), attr)
        return flat

    @classmethod
    def from_flat(cls, flat):
        unknown = sorted(set(flat) - set(FLAT_KEYS))
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}", {k: "unknown" for k in unknown})
        config = cls()
        if "num_layers" in flat and "freeze_below" not in flat:
            config.model.encoder.freeze_below = None
        for name, value in flat.items():
            section, attr = FLAT_KEYS[name]
            setattr(config._section(section), attr, value)
        config.model.encoder.__post_init__()
        return config

    def _section(self, section):
        return {
            "train": self,
            "model": self.model,
            "encoder": self.model.encoder,
            "fusion": self.model.fusion,
        }[section]


def _flat_keys():
    keys = {}
    for section, cls in (("train", TrainConfig), ("model", ModelConfig), ("encoder", EncoderConfig), ("fusion", FusionConfig)):
        for f in fields(cls):
            if f.name in ("model", "encoder", "fusion"):
                continue
            keys[f.name] = (section, f.name)
    return keys


FLAT_KEYS = _flat_keys()


class Config:
    """Base configuration"""
    LOG_LEVEL = os.getenv("SHORTTEXT_LOG_LEVEL", "INFO")

    LEARNING_RATE = 0.5
    BATCH_SIZE = 8
    MAX_EPOCHS = 30
    PATIENCE = 3
    SEED = 42
    CLIP_NORM = 5.0
    MAX_LEN = 128
    VOCAB_MAX_SIZE = 30000
    VOCAB_MIN_FREQ = 1

    NUM_LAYERS = 6
    HIDDEN = 64
    HEADS = 4
    FF_WIDTH = 256
    VOCAB_SIZE = 1000
    MAX_POSITIONS = 128
    NUM_SEGMENTS = 2
    SEGMENT_EMBEDDINGS = True

    LAM = 0.5
    MODE = "token-sequence"
    WORD_DIRECTION = "forward"
    SENTENCE_DIRECTION = "backward"
    BIDIRECTIONAL = False

    WORD_HIDDEN = 32
    SENTENCE_HIDDEN = 32
    NUM_LABELS = 2
    HEAD_HIDDEN = 0
    PHI = 1e-5
    LOSS_PREFACTOR = "tags"

    @classmethod
    def defaults(cls):
        """Flat defaults for every RunConfigFile key"""
        flat = {key: getattr(cls, key.upper()) for key in FLAT_KEYS if hasattr(cls, key.upper())}
        return flat

    @classmethod
    def train_config(cls, **overrides):
        flat = cls.defaults()
        flat.update(overrides)
        return TrainConfig.from_flat(flat).validate()


class DeskConfig(Config):
    """Desk-scale default: the full architecture, small widths"""


class TestingConfig(Config):
    """Tiny shapes for the test suite"""
    __test__ = False
    NUM_LAYERS = 2
    HIDDEN = 16
    HEADS = 2
    FF_WIDTH = 32
    MAX_POSITIONS = 64
    MAX_LEN = 64
    VOCAB_SIZE = 60
    VOCAB_MAX_SIZE = 60
    WORD_HIDDEN = 8
    SENTENCE_HIDDEN = 8
    MAX_EPOCHS = 5


class DistilConfig(Config):
    """Six-layer encoder at BERT-base width"""
    NUM_LAYERS = 6
    HIDDEN = 768
    HEADS = 12
    FF_WIDTH = 3072
    VOCAB_SIZE = 30522
    MAX_POSITIONS = 512
    MAX_LEN = 128
    WORD_HIDDEN = 128
    SENTENCE_HIDDEN = 128
    NUM_LABELS = 15


class BaseConfig(DistilConfig):
    """Twelve-layer, BERT-base-shaped encoder"""
    NUM_LAYERS = 12


config_by_name = {
    "desk": DeskConfig,
    "testing": TestingConfig,
    "distil": DistilConfig,
    "base": BaseConfig,
}


def get_preset(name=None):
    name = name or os.getenv("SHORTTEXT_CONFIG", "desk")
    try:
        return config_by_name[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(config_by_name)}") from None


def apply_env_overrides(config):
    """DBLP_SEED, when set, replaces the configured seed"""
    raw = os.getenv(SEED_ENV)
    if raw is not None and raw.strip():
        try:
            config.seed = int(raw)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {raw!r}", {SEED_ENV: raw}) from None
    return config


def parse_run_config_text(text):
    """Parse ``key = value`` lines into raw strings; '#' starts a comment"""
    raw = {}
    for number, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {number}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in raw:
            raise ConfigError(f"line {number}: duplicate key {key!r}", {key: "duplicate"})
        raw[key] = value
    return raw


def load_run_config(path, preset=None):
    """Read a RunConfigFile on top of a preset's defaults"""
    from shorttext.schemas import RunConfigSchema

    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise ConfigError(f"config {path} is not valid UTF-8: {e}") from e

    values = RunConfigSchema().load_flat(parse_run_config_text(text))
    flat = get_preset(preset).defaults()
    if "num_layers" in values and "freeze_below" not in values:
        flat.pop("freeze_below", None)
    flat.update(values)
    config = TrainConfig.from_flat(flat)
    return apply_env_overrides(config).validate()


def dump_run_config(config):
    lines = []
    for key, value in config.to_flat().items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"

"""
Pytest configuration file
"""
import numpy as np
import pandas as pd
import pytest
from faker import Faker

from shorttext.config import EncoderConfig, FusionConfig, ModelConfig, TestingConfig
from shorttext.data import Example
from shorttext.nn import Rng
from shorttext.text import build_vocab

# Initialize Faker
fake = Faker()

# One marker word per class
CLASS_WORDS = ("rocket", "violin", "tomato", "soccer")
LABEL_NAMES = ("space", "music", "food", "sport")

# Fixed filler list, shared by every class
FILLER_WORDS = (
    "the", "a", "new", "old", "big", "small", "red", "blue", "late", "early",
    "with", "from", "near", "after", "today", "again", "still", "very",
    "quite", "often", "city", "team", "week", "night",
)


def _fillers(n):
    return fake.words(nb=n, ext_word_list=FILLER_WORDS)


def synthetic_examples(per_class=50, seed=1234, num_classes=4):
    """Separable texts: every clause opens with its class's marker word"""
    fake.seed_instance(seed)
    examples = []
    for label in range(num_classes):
        for _ in range(per_class):
            clauses = [
                " ".join([CLASS_WORDS[label]] + _fillers(2))
                for _ in range(fake.random_int(min=1, max=3))
            ]
            examples.append(Example(text=", ".join(clauses) + ".", label=label))
    return examples


def write_examples(path, examples, label_names=LABEL_NAMES):
    frame = pd.DataFrame(
        {"text": [e.text for e in examples], "category": [label_names[e.label] for e in examples]}
    )
    frame.to_csv(path, index=False, encoding="utf-8")
    return path


@pytest.fixture
def rng():
    """A seeded generator"""
    return Rng(7)


@pytest.fixture
def np_rng():
    return np.random.default_rng(7)


@pytest.fixture
def tiny_encoder_config():
    """2 layers, d=8, two heads"""
    return EncoderConfig(
        num_layers=2, hidden=8, heads=2, ff_width=16, vocab_size=30, max_positions=16, freeze_below=0
    )


@pytest.fixture
def tiny_model_config(tiny_encoder_config):
    return ModelConfig(
        encoder=tiny_encoder_config,
        fusion=FusionConfig(),
        word_hidden=4,
        sentence_hidden=5,
        num_labels=3,
        phi=1e-3,
    )


@pytest.fixture
def train_config():
    """The testing preset as a TrainConfig"""
    return TestingConfig.train_config()


@pytest.fixture
def examples():
    """200 separable examples over four classes"""
    return synthetic_examples()


@pytest.fixture
def vocab(examples):
    return build_vocab([e.text for e in examples], max_size=60)


@pytest.fixture
def dataset_csv(tmp_path, examples):
    """The synthetic examples written as a text,category CSV"""
    return str(write_examples(tmp_path / "dataset.csv", examples))

"""
Tests for the assembled classifier
"""
import copy

import numpy as np
import pytest

from shorttext import create_model
from shorttext.models import HierarchicalClassifier
from shorttext.nn import Rng, Tape, backward
from shorttext.text import Vocabulary, encode_batch, encode_text
from shorttext.text.vocab import SPECIALS

TEXTS = ["alpha beta, gamma delta. beta", "gamma", "delta alpha beta gamma", "?!."]


@pytest.fixture
def small_vocab():
    return Vocabulary(list(SPECIALS) + ["alpha", "beta", "gamma", "delta"])


@pytest.fixture
def batch(small_vocab):
    return encode_batch([encode_text(t, small_vocab) for t in TEXTS])


def with_mode(config, mode, **fusion):
    config = copy.deepcopy(config)
    config.fusion.mode = mode
    for key, value in fusion.items():
        setattr(config.fusion, key, value)
    return config


@pytest.mark.parametrize("mode", ["token-sequence", "cls-ladder", "encoder-only"])
def test_forward_probabilities(tiny_model_config, batch, mode):
    """Test a (batch x m) distribution per item in every mode"""
    model = HierarchicalClassifier(with_mode(tiny_model_config, mode), Rng(3))
    probs = model(batch).values
    assert probs.shape == (len(TEXTS), 3)
    assert np.all(probs > 0)
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_encoder_only_has_no_lstms(tiny_model_config):
    model = HierarchicalClassifier(with_mode(tiny_model_config, "encoder-only"), Rng(3))
    assert not hasattr(model, "word_lstm") and not hasattr(model, "sentence_lstm")
    assert not hasattr(model.head, "b")


def test_cls_ladder_has_no_word_lstm(tiny_model_config):
    model = HierarchicalClassifier(with_mode(tiny_model_config, "cls-ladder"), Rng(3))
    assert not hasattr(model, "word_lstm")
    assert model.sentence_lstm.input_size == tiny_model_config.encoder.hidden


def test_sentence_features_shapes(tiny_model_config, batch):
    """Test one feature row per clause and the fallback row for a clause-free text"""
    model = HierarchicalClassifier(tiny_model_config, Rng(3))
    out = model.encoder(batch.ids, batch.mask)
    word_states = model.word_lstm(out.final, mask=batch.word_mask())
    features, mask = model.sentence_features(out, word_states, batch)
    width = tiny_model_config.encoder.hidden + tiny_model_config.word_hidden
    assert features.shape == (4, 3, width)
    np.testing.assert_array_equal(mask.sum(axis=1), [3, 1, 1, 1])


def test_single_clause_feature_is_padded_word_hidden(tiny_model_config, batch):
    model = HierarchicalClassifier(tiny_model_config, Rng(3))
    out = model.encoder(batch.ids, batch.mask)
    word_states = model.word_lstm(out.final, mask=batch.word_mask())
    features, _ = model.sentence_features(out, word_states, batch)
    d = tiny_model_config.encoder.hidden
    # "gamma" has one clause over position 1
    np.testing.assert_array_equal(features.values[1, 0, :d], 0.0)
    np.testing.assert_array_equal(features.values[1, 0, d:], word_states.values[1, 1])


def test_clause_free_text_falls_back_to_cls(tiny_model_config, batch):
    model = HierarchicalClassifier(tiny_model_config, Rng(3))
    out = model.encoder(batch.ids, batch.mask)
    word_states = model.word_lstm(out.final, mask=batch.word_mask())
    features, _ = model.sentence_features(out, word_states, batch)
    d = tiny_model_config.encoder.hidden
    np.testing.assert_array_equal(features.values[3, 0, :d], out.final.values[3, 0])
    np.testing.assert_array_equal(features.values[3, 0, d:], 0.0)


def test_bidirectional(tiny_model_config, batch):
    config = with_mode(tiny_model_config, "token-sequence", bidirectional=True)
    model = HierarchicalClassifier(config, Rng(3))
    assert model.word_lstm.output_size == 2 * config.word_hidden
    assert model.sentence_lstm.output_size == 2 * config.sentence_hidden
    probs = model(batch).values
    np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)


def test_frozen_encoder(tiny_model_config):
    """Test that freeze_below = L freezes every encoder parameter and nothing else"""
    config = copy.deepcopy(tiny_model_config)
    config.encoder.freeze_below = config.encoder.num_layers
    model = HierarchicalClassifier(config, Rng(3))
    for name, p in model.named_parameters():
        assert p.trainable is not name.startswith("encoder.")


def test_parameter_names_are_paths(tiny_model_config):
    model = HierarchicalClassifier(tiny_model_config, Rng(3))
    names = [p.name for p in model.parameters()]
    assert len(names) == len(set(names))
    assert "head.W" in names
    assert any(name.startswith("encoder.") for name in names)


def test_meta_model(tiny_model_config):
    model = create_model(tiny_model_config)
    assert model.is_meta
    assert not create_model(tiny_model_config, seed=1).is_meta


def test_same_seed_same_model(tiny_model_config):
    a = create_model(tiny_model_config, seed=11).state()
    b = create_model(tiny_model_config, seed=11).state()
    assert a.keys() == b.keys()
    assert all(np.array_equal(a[k], b[k]) for k in a)


def test_loss_gradients_reach_every_trainable_parameter(tiny_model_config, batch):
    model = HierarchicalClassifier(tiny_model_config, Rng(3))
    trainable = [p for p in model.parameters() if p.trainable]
    with Tape() as tape:
        tape.watch(trainable)
        value = model.loss(batch, [0, 1, 2, 0])
    backward(value, tape)
    assert value.item() > 0
    assert all(p.grad is not None and p.grad.shape == p.shape for p in trainable)
    assert np.abs(model.head.W.grad).sum() > 0


def test_predict(tiny_model_config, batch):
    model = HierarchicalClassifier(tiny_model_config, Rng(3))
    labels, probs = model.predict(batch)
    np.testing.assert_array_equal(labels, probs.argmax(axis=1))

"""
Tests for pooling, the softmax head and the loss
"""
import math

import numpy as np
import pytest

from shorttext.errors import ContractError, DimensionError
from shorttext.models.head import (
    ClassifierHead,
    class_probs,
    loss,
    max_pool_time,
    one_hot,
    predict_label,
    regularizer,
)
from shorttext.nn import Parameter, Rng, Tensor


def zero_head(p, m):
    head = ClassifierHead(p, m, Rng(0))
    head.W.values = np.zeros(head.W.shape)
    return head


def test_max_pool_examples():
    """Test identity, [[1,5],[3,2]] -> [3,5] and permutation invariance"""
    np.testing.assert_array_equal(max_pool_time(Tensor([[1.0, 2.0]])).values, [1.0, 2.0])
    np.testing.assert_array_equal(max_pool_time(Tensor([[1.0, 5.0], [3.0, 2.0]])).values, [3.0, 5.0])

    H = np.random.default_rng(0).normal(size=(7, 4))
    pooled = max_pool_time(Tensor(H)).values
    for seed in range(5):
        shuffled = H[np.random.default_rng(seed).permutation(7)]
        assert np.array_equal(max_pool_time(Tensor(shuffled)).values, pooled)


def test_max_pool_ignores_masked_steps():
    H = Tensor([[[1.0], [9.0]]])
    assert max_pool_time(H, mask=np.array([[1, 0]])).values.tolist() == [[1.0]]


def test_max_pool_empty():
    with pytest.raises(ContractError):
        max_pool_time(Tensor(np.zeros((0, 3))))


def test_class_probs_uniform():
    """Test W=0, b=0, m=15 -> 1/15 everywhere"""
    probs = class_probs(Tensor(np.ones(6)), zero_head(6, 15)).values
    np.testing.assert_allclose(probs, np.full(15, 1 / 15), atol=1e-15)


def test_class_probs_ln3():
    """Test logits (0, ln 3) -> (0.25, 0.75)"""
    head = zero_head(2, 2)
    head.b.values = np.array([0.0, math.log(3.0)])
    np.testing.assert_allclose(class_probs(Tensor([0.3, -0.1]), head).values, [0.25, 0.75], atol=1e-12)


def test_class_probs_bias_shift_keeps_argmax():
    rng = Rng(4)
    head = ClassifierHead(5, 4, rng)
    v = Tensor(rng.normal((5,)))
    before = class_probs(v, head).values
    head.b.values = head.b.values + 10.0
    after = class_probs(v, head).values
    assert before.argmax() == after.argmax()
    assert np.all(after > 0)
    assert after.sum() == pytest.approx(1.0, abs=1e-12)


def test_class_probs_shape_mismatch():
    with pytest.raises(DimensionError):
        class_probs(Tensor(np.ones(3)), zero_head(4, 2))


def test_loss_perfect_prediction():
    assert loss(Tensor([0.0, 1.0, 0.0]), one_hot(1, 3)).item() == 0.0


def test_loss_uniform_prediction():
    """Test (1/m) ln m with the 1/m prefactor and ln m without it"""
    m = 5
    probs = Tensor(np.full((2, m), 1 / m))
    y = one_hot([0, 3], m)
    assert loss(probs, y).item() == pytest.approx(math.log(m) / m, abs=1e-12)
    assert loss(probs, y, prefactor="none").item() == pytest.approx(math.log(m), abs=1e-12)


def test_loss_l2_term():
    """Test that the penalty covers weight matrices only"""
    W = Parameter(np.full((2, 2), 2.0), name="W")
    b = Parameter(np.full(2, 100.0), name="b")
    frozen = Parameter(np.full((2, 2), 100.0), name="frozen", trainable=False)
    probs = Tensor([1.0, 0.0])
    value = loss(probs, one_hot(0, 2), phi=0.5, regularized_params=[W, b, frozen]).item()
    assert value == pytest.approx(0.5 * 16.0)

    zero = Parameter(np.zeros((3, 3)), name="zero")
    assert loss(probs, one_hot(0, 2), phi=1.0, regularized_params=[zero]).item() == 0.0
    assert regularizer([b]) is None


def test_loss_clamps_log():
    value = loss(Tensor([0.0, 1.0]), one_hot(0, 2), prefactor="none").item()
    assert value == pytest.approx(-math.log(1e-12))


def test_loss_requires_one_hot():
    with pytest.raises(ContractError):
        loss(Tensor([0.5, 0.5]), np.array([0.5, 0.5]))
    with pytest.raises(ContractError):
        loss(Tensor([0.5, 0.5]), np.array([1.0, 0.5]), prefactor="bogus")


def test_loss_non_negative_and_decreasing():
    y = one_hot(0, 3)
    values = [loss(Tensor([p, (1 - p) / 2, (1 - p) / 2]), y).item() for p in (0.2, 0.5, 0.9, 0.999)]
    assert all(v >= 0 for v in values)
    assert values == sorted(values, reverse=True)


def test_predict_label_ties_to_lowest():
    assert predict_label(Tensor([0.4, 0.4, 0.2])) == 0
    assert predict_label(np.array([[0.1, 0.9], [0.7, 0.3]])).tolist() == [1, 0]


def test_feature_layer():
    """Test the optional tanh dense layer before the softmax"""
    head = ClassifierHead(6, 3, Rng(1), hidden=4)
    assert head.W.shape == (3, 4)
    assert head.feature.weight.shape == (4, 6)
    probs = class_probs(Tensor(np.ones(6)), head).values
    assert probs.sum() == pytest.approx(1.0, abs=1e-12)

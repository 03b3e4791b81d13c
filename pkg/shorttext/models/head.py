"""
Max-over-time pooling, softmax classifier and the regularized loss
"""
import numpy as np

from shorttext.errors import ContractError, DimensionError
from shorttext.nn import ops
from shorttext.nn.module import Linear, Module, constant, weight

LOG_FLOOR = 1e-12


def max_pool_time(H, mask=None):
    """Coordinatewise maximum over the time axis of (n x p) or (batch x n x p)"""
    H = ops.as_tensor(H)
    if H.ndim < 2 or H.shape[-2] == 0:
        raise ContractError(f"max_pool_time needs a non-empty sequence, got shape {H.shape}")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)[..., None]
    return ops.max_pool(H, axis=-2, mask=mask)


class ClassifierHead(Module):
    """Softmax layer W (m x p), b (m), with an optional tanh feature layer before it"""

    def __init__(self, in_features, num_labels, rng=None, hidden=0, bias=True):
        if hidden:
            self.feature = Linear(in_features, hidden, rng)
            in_features = hidden
        self.W = weight(rng, (num_labels, in_features), "W")
        if bias:
            self.b = constant(rng, (num_labels,), "b")
        self.num_labels = num_labels

    def logits(self, v):
        if hasattr(self, "feature"):
            v = ops.tanh(self.feature(v))
        return ops.linear(v, self.W, getattr(self, "b", None))

    def __call__(self, v):
        return class_probs(v, self)


def class_probs(v, head):
    """softmax(W v + b)"""
    v = ops.as_tensor(v)
    expected = head.feature.weight.shape[1] if hasattr(head, "feature") else head.W.shape[1]
    if v.shape[-1] != expected:
        raise DimensionError("class_probs", v.shape, head.W.shape)
    return ops.softmax(head.logits(v), axis=-1)


def one_hot(labels, num_labels):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= num_labels):
        raise ContractError(f"labels must lie in [0, {num_labels})")
    out = np.zeros(labels.shape + (num_labels,))
    np.put_along_axis(out, labels[..., None], 1.0, axis=-1)
    return out


def _check_one_hot(y):
    rows = y.reshape(-1, y.shape[-1])
    if not (np.isin(rows, (0.0, 1.0)).all() and (rows.sum(axis=1) == 1).all()):
        raise ContractError("targets must be one-hot")


def regularizer(params):
    """Sum of squared entries over trainable weight matrices (biases excluded)"""
    terms = [ops.sum(ops.square(p)) for p in params if p.trainable and len(p.shape) >= 2]
    if not terms:
        return None
    total = terms[0]
    for term in terms[1:]:
        total = total + term
    return total


def loss(probs, y, phi=0.0, regularized_params=(), prefactor="tags"):
    """-(1/m) sum_i y_i log p_i averaged over the batch, plus phi * ||w||^2

    ``prefactor="none"`` drops the 1/m factor (plain cross-entropy).
    """
    probs = ops.as_tensor(probs)
    y = np.asarray(y, dtype=np.float64)
    if y.shape != probs.shape:
        raise DimensionError("loss", probs.shape, y.shape)
    _check_one_hot(y)
    if phi < 0:
        raise ContractError(f"phi must be non-negative, got {phi}")

    per_example = ops.neg(ops.sum(ops.mul(ops.log(probs, floor=LOG_FLOOR), y), axis=-1))
    if prefactor == "tags":
        per_example = ops.scale(per_example, 1.0 / probs.shape[-1])
    elif prefactor != "none":
        raise ContractError(f"prefactor must be 'tags' or 'none', got {prefactor!r}")
    total = ops.mean(per_example)

    if phi > 0:
        penalty = regularizer(regularized_params)
        if penalty is not None:
            total = total + ops.scale(penalty, phi)
    return total


def predict_label(probs):
    """argmax; ties go to the lowest label id"""
    values = probs.values if hasattr(probs, "values") else np.asarray(probs)
    labels = np.argmax(values, axis=-1)
    return int(labels) if np.ndim(labels) == 0 else labels

"""
Differentiable op vocabulary

Each op computes its result with numpy and, when a tape is active and an
input requires gradients, records a closure mapping the output adjoint to
one adjoint per input (None for inputs that take no gradient).
"""
import math

import numpy as np

from shorttext.errors import ContractError, DimensionError, VocabularyError
from shorttext.nn.tensor import DTYPE, Tensor, current_tape

GELU_C = math.sqrt(2.0 / math.pi)


def as_tensor(x):
    return x if isinstance(x, Tensor) else Tensor(x)


def _result(values, inputs, backward_fn):
    out = Tensor(values)
    tape = current_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        out._requires_grad = True
        tape.record(out, inputs, backward_fn)
    return out


def _unbroadcast(grad, shape):
    """Sum ``grad`` down to ``shape`` after numpy broadcasting"""
    if grad.shape == tuple(shape):
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(op, a, b):
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(op, a.shape, b.shape) from None


# Elementwise arithmetic

def add(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("add", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(g, b.shape)

    return _result(a.values + b.values, (a, b), backward)


def sub(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("sub", a, b)

    def backward(g):
        return _unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)

    return _result(a.values - b.values, (a, b), backward)


def mul(a, b):
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape("mul", a, b)

    def backward(g):
        return _unbroadcast(g * b.values, a.shape), _unbroadcast(g * a.values, b.shape)

    return _result(a.values * b.values, (a, b), backward)


def neg(a):
    a = as_tensor(a)
    return _result(-a.values, (a,), lambda g: (-g,))


def scale(a, factor):
    """Multiply by a Python scalar; ``factor == 0`` yields exact zeros"""
    a = as_tensor(a)
    factor = float(factor)
    return _result(a.values * factor, (a,), lambda g: (g * factor,))


def square(a):
    a = as_tensor(a)
    return _result(a.values * a.values, (a,), lambda g: (2.0 * a.values * g,))


# Linear algebra

def matmul(a, b):
    """Matrix product over the last two axes, batch axes broadcast"""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise DimensionError("matmul", a.shape, b.shape)
    try:
        values = np.matmul(a.values, b.values)
    except ValueError:
        raise DimensionError("matmul", a.shape, b.shape) from None

    def backward(g):
        ga = np.matmul(g, np.swapaxes(b.values, -1, -2)) if a.requires_grad else None
        gb = np.matmul(np.swapaxes(a.values, -1, -2), g) if b.requires_grad else None
        return (
            None if ga is None else _unbroadcast(ga, a.shape),
            None if gb is None else _unbroadcast(gb, b.shape),
        )

    return _result(values, (a, b), backward)


def linear(x, weight, bias=None):
    """x @ weight.T (+ bias) for x of shape (..., n) and weight (k, n)"""
    x, weight = as_tensor(x), as_tensor(weight)
    if weight.ndim != 2 or x.shape[-1] != weight.shape[1]:
        raise DimensionError("linear", x.shape, weight.shape)
    values = x.values @ weight.values.T
    inputs = (x, weight)
    if bias is not None:
        bias = as_tensor(bias)
        if bias.shape != (weight.shape[0],):
            raise DimensionError("linear", weight.shape, bias.shape)
        values = values + bias.values
        inputs = (x, weight, bias)

    def backward(g):
        gx = g @ weight.values if x.requires_grad else None
        gw = None
        if weight.requires_grad:
            gw = g.reshape(-1, g.shape[-1]).T @ x.values.reshape(-1, x.shape[-1])
        if bias is None:
            return gx, gw
        gb = g.reshape(-1, g.shape[-1]).sum(axis=0) if bias.requires_grad else None
        return gx, gw, gb

    return _result(values, inputs, backward)


# Nonlinearities

def _sigmoid(values):
    # 0.5 * (1 + tanh(x / 2)) never overflows and keeps s(x) + s(-x) == 1
    return 0.5 * (1.0 + np.tanh(0.5 * values))


def sigmoid(x):
    x = as_tensor(x)
    y = _sigmoid(x.values)
    return _result(y, (x,), lambda g: (g * y * (1.0 - y),))


def tanh(x):
    x = as_tensor(x)
    y = np.tanh(x.values)
    return _result(y, (x,), lambda g: (g * (1.0 - y * y),))


ACTIVATIONS = {"sigmoid": sigmoid, "tanh": tanh}


def activate(x, kind):
    try:
        fn = ACTIVATIONS[kind]
    except KeyError:
        raise ContractError(f"unknown activation {kind!r}; expected one of {sorted(ACTIVATIONS)}") from None
    return fn(x)


def gelu(x):
    """GELU, tanh approximation"""
    x = as_tensor(x)
    v = x.values
    inner = GELU_C * (v + 0.044715 * v ** 3)
    t = np.tanh(inner)
    y = 0.5 * v * (1.0 + t)

    def backward(g):
        d_inner = GELU_C * (1.0 + 3 * 0.044715 * v * v)
        return (g * (0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * d_inner),)

    return _result(y, (x,), backward)


def exp(x):
    x = as_tensor(x)
    y = np.exp(x.values)
    return _result(y, (x,), lambda g: (g * y,))


def log(x, floor=None):
    """Natural log, optionally clamped below at ``floor`` (no gradient under the clamp)"""
    x = as_tensor(x)
    v = x.values
    if floor is not None:
        clamped = v < floor
        v = np.where(clamped, floor, v)

    def backward(g):
        grad = g / v
        if floor is not None:
            grad = np.where(clamped, 0.0, grad)
        return (grad,)

    return _result(np.log(v), (x,), backward)


def softmax(x, axis=-1, mask=None):
    """Softmax along ``axis``; positions where ``mask`` is False get exactly zero weight"""
    x = as_tensor(x)
    v = x.values
    if mask is not None:
        keep = np.broadcast_to(np.asarray(mask, dtype=bool), v.shape)
        v = np.where(keep, v, -np.inf)
    peak = np.max(v, axis=axis, keepdims=True)
    peak = np.where(np.isfinite(peak), peak, 0.0)
    e = np.exp(v - peak)
    total = e.sum(axis=axis, keepdims=True)
    y = np.divide(e, total, out=np.zeros_like(e), where=total > 0)

    def backward(g):
        return (y * (g - (g * y).sum(axis=axis, keepdims=True)),)

    return _result(y, (x,), backward)


def softmax_rows(x):
    """Row-wise softmax of an r x c matrix"""
    x = as_tensor(x)
    if x.ndim != 2 or x.shape[1] < 1:
        raise DimensionError("softmax_rows", x.shape)
    return softmax(x, axis=-1)


# Reductions and reshaping

def sum(x, axis=None, keepdims=False):  # noqa: A001 - mirrors numpy
    x = as_tensor(x)
    y = x.values.sum(axis=axis, keepdims=keepdims)

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, x.shape).copy(),)

    return _result(y, (x,), backward)


def mean(x, axis=None, keepdims=False):
    x = as_tensor(x)
    count = x.size if axis is None else int(np.prod([x.shape[a] for a in np.atleast_1d(axis)]))
    return scale(sum(x, axis=axis, keepdims=keepdims), 1.0 / count)


def reshape(x, shape):
    x = as_tensor(x)
    return _result(x.values.reshape(shape), (x,), lambda g: (g.reshape(x.shape),))


def transpose(x, axes=None):
    x = as_tensor(x)
    if axes is None:
        axes = tuple(reversed(range(x.ndim)))
    inverse = tuple(np.argsort(axes))
    return _result(np.transpose(x.values, axes), (x,), lambda g: (np.transpose(g, inverse),))


def getitem(x, index):
    x = as_tensor(x)

    def backward(g):
        grad = np.zeros(x.shape, dtype=DTYPE)
        np.add.at(grad, index, g)
        return (grad,)

    return _result(np.array(x.values[index]), (x,), backward)


def concat(tensors, axis=-1):
    tensors = [as_tensor(t) for t in tensors]
    try:
        values = np.concatenate([t.values for t in tensors], axis=axis)
    except ValueError:
        raise DimensionError("concat", *(t.shape for t in tensors)) from None
    bounds = np.cumsum([t.shape[axis] for t in tensors])[:-1]

    def backward(g):
        return tuple(np.split(g, bounds, axis=axis))

    return _result(values, tuple(tensors), backward)


def stack(tensors, axis=0):
    tensors = [as_tensor(t) for t in tensors]
    try:
        values = np.stack([t.values for t in tensors], axis=axis)
    except ValueError:
        raise DimensionError("stack", *(t.shape for t in tensors)) from None

    def backward(g):
        return tuple(np.take(g, i, axis=axis) for i in range(len(tensors)))

    return _result(values, tuple(tensors), backward)


# Layers with dedicated adjoints

def embedding(table, ids):
    """Row lookup ``table[ids]`` for an integer id array"""
    table = as_tensor(table)
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= table.shape[0]):
        bad = int(ids.max() if ids.max() >= table.shape[0] else ids.min())
        raise VocabularyError(f"id {bad} out of range for a table of {table.shape[0]} rows")

    def backward(g):
        grad = np.zeros(table.shape, dtype=DTYPE)
        np.add.at(grad, ids, g)
        return (grad,)

    return _result(table.values[ids], (table,), backward)


def layer_norm(x, gamma, beta, eps=1e-12):
    """Normalise over the last axis, then apply the affine ``gamma * x_hat + beta``"""
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    if gamma.shape != (x.shape[-1],) or beta.shape != gamma.shape:
        raise DimensionError("layer_norm", x.shape, gamma.shape, beta.shape)
    mu = x.values.mean(axis=-1, keepdims=True)
    centered = x.values - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    x_hat = centered * inv
    y = x_hat * gamma.values + beta.values

    def backward(g):
        gx = None
        if x.requires_grad:
            gh = g * gamma.values
            n = x.shape[-1]
            gx = inv / n * (
                n * gh
                - gh.sum(axis=-1, keepdims=True)
                - x_hat * (gh * x_hat).sum(axis=-1, keepdims=True)
            )
        flat = g.reshape(-1, g.shape[-1])
        gg = (flat * x_hat.reshape(flat.shape)).sum(axis=0) if gamma.requires_grad else None
        gb = flat.sum(axis=0) if beta.requires_grad else None
        return gx, gg, gb

    return _result(y, (x, gamma, beta), backward)


def max_pool(x, axis=0, mask=None):
    """Maximum along ``axis``; the adjoint flows to the first maximal entry

    Positions where ``mask`` is False never win.
    """
    x = as_tensor(x)
    v = x.values
    if mask is not None:
        keep = np.broadcast_to(np.asarray(mask, dtype=bool), v.shape)
        v = np.where(keep, v, -np.inf)
    winners = np.expand_dims(np.argmax(v, axis=axis), axis)
    y = np.take_along_axis(x.values, winners, axis=axis).squeeze(axis)

    def backward(g):
        grad = np.zeros(x.shape, dtype=DTYPE)
        np.put_along_axis(grad, winners, np.expand_dims(g, axis), axis=axis)
        return (grad,)

    return _result(y, (x,), backward)

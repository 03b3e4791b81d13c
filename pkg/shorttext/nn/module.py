"""
Parameter containers
"""
import numpy as np

from shorttext.nn import ops
from shorttext.nn.tensor import DTYPE, Parameter


def weight(rng, shape, name):
    """Glorot-uniform weight, or a meta parameter when ``rng`` is None"""
    if rng is None:
        return Parameter.meta(shape, name=name)
    return Parameter(rng.glorot(shape), name=name)


def constant(rng, shape, name, value=0.0):
    if rng is None:
        return Parameter.meta(shape, name=name)
    return Parameter(np.full(shape, value, dtype=DTYPE), name=name)


class Module:
    """Base class for anything owning parameters

    Parameters and sub-modules are discovered from instance attributes in
    assignment order, so names follow attribute paths
    (``encoder.layer3.attn.wq``).
    """

    def named_parameters(self, prefix=""):
        for attr, value in vars(self).items():
            if attr.startswith("_"):
                continue
            path = f"{prefix}{attr}"
            if isinstance(value, Parameter):
                yield path, value
            elif isinstance(value, Module):
                yield from value.named_parameters(prefix=f"{path}.")

    def parameters(self):
        return [p for _, p in self.named_parameters()]

    def name_parameters(self, prefix=""):
        """Stamp every parameter with its full attribute path"""
        for name, param in self.named_parameters(prefix=prefix):
            param.name = name
        return self

    def state(self):
        """Copies of all parameter values keyed by name"""
        return {name: p.values.copy() for name, p in self.named_parameters()}

    def load_state(self, state):
        for name, param in self.named_parameters():
            param.values = np.array(state[name], dtype=DTYPE)


class Linear(Module):
    """y = x W^T + b with W of shape (out, in)"""

    def __init__(self, in_features, out_features, rng=None, bias=True):
        self.weight = weight(rng, (out_features, in_features), "weight")
        self.bias = constant(rng, (out_features,), "bias") if bias else None

    def __call__(self, x):
        return ops.linear(x, self.weight, self.bias)


class LayerNorm(Module):
    def __init__(self, dim, rng=None, eps=1e-12):
        self.gamma = constant(rng, (dim,), "gamma", 1.0)
        self.beta = constant(rng, (dim,), "beta", 0.0)
        self._eps = eps

    def __call__(self, x):
        return ops.layer_norm(x, self.gamma, self.beta, eps=self._eps)


class Embedding(Module):
    def __init__(self, num_rows, dim, rng=None):
        self.table = weight(rng, (num_rows, dim), "table")

    def __call__(self, ids):
        return ops.embedding(self.table, ids)

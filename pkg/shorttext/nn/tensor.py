"""
Tensor, Parameter and Tape: the reverse-mode differentiation substrate

Every op in ``shorttext.nn.ops`` that runs while a Tape is active, and that
has at least one input requiring gradients, appends a record
``(output, inputs, backward_fn)`` to the tape. ``backward`` replays those
records in reverse order. Without an active tape ops only compute values,
which is how evaluation runs.
"""
import math
import threading

import numpy as np

from shorttext.errors import ContractError

DTYPE = np.float64

_local = threading.local()


def _tape_stack():
    """Active tapes of the calling thread, outermost first"""
    stack = getattr(_local, "tapes", None)
    if stack is None:
        stack = _local.tapes = []
    return stack


def current_tape():
    """The innermost tape active in this thread, or None"""
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tensor:
    """Dense float64 array with an optional gradient slot"""

    __slots__ = ("values", "grad", "_requires_grad")

    def __init__(self, values, requires_grad=False):
        self.values = np.asarray(values, dtype=DTYPE)
        self.grad = None
        self._requires_grad = bool(requires_grad)

    @property
    def requires_grad(self):
        return self._requires_grad

    @property
    def shape(self):
        return self.values.shape

    @property
    def ndim(self):
        return len(self.shape)

    @property
    def size(self):
        return math.prod(self.shape)

    def item(self):
        if self.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.values.reshape(-1)[0])

    def numpy(self):
        return self.values

    def zero_grad(self):
        self.grad = np.zeros(self.shape, dtype=DTYPE)

    # Operator sugar; the op vocabulary lives in shorttext.nn.ops
    def __add__(self, other):
        from shorttext.nn import ops
        return ops.add(self, other)

    def __radd__(self, other):
        from shorttext.nn import ops
        return ops.add(other, self)

    def __sub__(self, other):
        from shorttext.nn import ops
        return ops.sub(self, other)

    def __rsub__(self, other):
        from shorttext.nn import ops
        return ops.sub(other, self)

    def __mul__(self, other):
        from shorttext.nn import ops
        return ops.mul(self, other)

    def __rmul__(self, other):
        from shorttext.nn import ops
        return ops.mul(other, self)

    def __neg__(self):
        from shorttext.nn import ops
        return ops.neg(self)

    def __matmul__(self, other):
        from shorttext.nn import ops
        return ops.matmul(self, other)

    def __getitem__(self, index):
        from shorttext.nn import ops
        return ops.getitem(self, index)

    def __repr__(self):
        return f"<Tensor shape={self.shape} requires_grad={self.requires_grad}>"


class Parameter(Tensor):
    """Named learnable tensor

    A parameter built with ``values=None`` is a meta parameter: it has a
    shape but no storage, which is enough for parameter accounting.
    """

    __slots__ = ("name", "trainable", "_meta_shape")

    def __init__(self, values, name="", trainable=True, shape=None):
        if values is None:
            if shape is None:
                raise ContractError("meta parameter needs a shape")
            self.values = None
            self.grad = None
            self._meta_shape = tuple(int(s) for s in shape)
        else:
            super().__init__(values)
            self._meta_shape = None
        self.name = name
        self.trainable = bool(trainable)

    @classmethod
    def meta(cls, shape, name=""):
        return cls(None, name=name, shape=shape)

    @property
    def tensor(self):
        return self

    @property
    def requires_grad(self):
        return self.trainable

    @property
    def is_meta(self):
        return self.values is None

    @property
    def shape(self):
        if self.values is None:
            return self._meta_shape
        return self.values.shape

    def __repr__(self):
        state = "trainable" if self.trainable else "frozen"
        return f"<Parameter {self.name} shape={self.shape} {state}>"


class Tape:
    """Ordered record of executed operations

    Use as a context manager; ops executed inside the ``with`` block are
    recorded. Parameters can be registered with ``watch`` so that they
    receive a zero gradient even when the loss does not depend on them.
    """

    def __init__(self):
        self.records = []
        self._produced = set()
        self._leaves = {}

    def __enter__(self):
        _tape_stack().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        _tape_stack().remove(self)
        return False

    def __len__(self):
        return len(self.records)

    def record(self, output, inputs, backward_fn):
        for tensor in inputs:
            if tensor.requires_grad and id(tensor) not in self._produced:
                self._leaves[id(tensor)] = tensor
        self._produced.add(id(output))
        self.records.append((output, inputs, backward_fn))

    def watch(self, tensors):
        for tensor in tensors:
            if tensor.requires_grad:
                self._leaves[id(tensor)] = tensor

    @property
    def leaves(self):
        return list(self._leaves.values())

    def clear(self):
        """Drop all records and reset every known leaf gradient to zero"""
        for leaf in self._leaves.values():
            leaf.zero_grad()
        self.records = []
        self._produced = set()


def backward(loss, tape):
    """Populate ``grad`` of every gradient-requiring leaf recorded on ``tape``"""
    if loss.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")

    adjoints = {id(loss): np.ones(loss.shape, dtype=DTYPE)}
    for output, inputs, backward_fn in reversed(tape.records):
        upstream = adjoints.pop(id(output), None)
        if upstream is None:
            continue
        for tensor, grad in zip(inputs, backward_fn(upstream)):
            if grad is None or not tensor.requires_grad:
                continue
            key = id(tensor)
            if key in adjoints:
                adjoints[key] = adjoints[key] + grad
            else:
                adjoints[key] = grad

    for key, leaf in tape._leaves.items():
        grad = adjoints.get(key)
        if grad is None:
            grad = np.zeros(leaf.shape, dtype=DTYPE)
        leaf.grad = grad if leaf.grad is None else leaf.grad + grad

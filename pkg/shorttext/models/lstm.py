"""
LSTM cell and masked sequence runners for the word and sentence levels
"""
from dataclasses import dataclass

import numpy as np

from shorttext.errors import ContractError, DimensionError
from shorttext.nn import ops
from shorttext.nn.module import Module, constant, weight
from shorttext.nn.tensor import Tensor

GATES = ("f", "i", "c", "o")


class LSTMCell(Module):
    """Gate parameters W_x* (k x n), W_h* (k x k) and b_* (k)"""

    def __init__(self, input_size, hidden_size, rng=None):
        for gate in GATES:
            setattr(self, f"W_x{gate}", weight(rng, (hidden_size, input_size), f"W_x{gate}"))
            setattr(self, f"W_h{gate}", weight(rng, (hidden_size, hidden_size), f"W_h{gate}"))
            setattr(self, f"b_{gate}", constant(rng, (hidden_size,), f"b_{gate}"))
        self.input_size = input_size
        self.hidden_size = hidden_size

    def gate(self, name, x, h):
        return ops.linear(x, getattr(self, f"W_x{name}"), getattr(self, f"b_{name}")) + ops.linear(
            h, getattr(self, f"W_h{name}")
        )


@dataclass
class LstmState:
    h: Tensor
    c: Tensor

    @classmethod
    def zeros(cls, hidden_size, batch=None):
        shape = (hidden_size,) if batch is None else (batch, hidden_size)
        return cls(Tensor(np.zeros(shape)), Tensor(np.zeros(shape)))


def lstm_gates(x, state, p):
    if x.shape[-1] != p.input_size or state.h.shape[-1] != p.hidden_size:
        raise DimensionError("lstm_cell_step", x.shape, state.h.shape, (p.hidden_size, p.input_size))
    return {
        "f": ops.sigmoid(p.gate("f", x, state.h)),
        "i": ops.sigmoid(p.gate("i", x, state.h)),
        "c": ops.tanh(p.gate("c", x, state.h)),
        "o": ops.sigmoid(p.gate("o", x, state.h)),
    }


def lstm_cell_step(x, state, p):
    """One step: c' = f*c + i*c~, h' = o*tanh(c')"""
    g = lstm_gates(x, state, p)
    c = g["f"] * state.c + g["i"] * g["c"]
    h = g["o"] * ops.tanh(c)
    return LstmState(h=h, c=c)


def run_lstm(xs, p, direction="forward", mask=None):
    """Run ``p`` over a (seq x n) or (batch x seq x n) tensor

    Outputs are aligned to input positions. Where ``mask`` is 0 the state
    passes through unchanged and the output is a zero vector.
    """
    if direction not in ("forward", "backward"):
        raise ContractError(f"direction must be forward or backward, got {direction!r}")
    xs = ops.as_tensor(xs)
    single = xs.ndim == 2
    if single:
        xs = ops.reshape(xs, (1,) + xs.shape)
    batch, seq, _ = xs.shape
    if seq == 0:
        raise ContractError("LSTM input sequence is empty")
    if xs.shape[-1] != p.input_size:
        raise DimensionError("run_lstm", xs.shape, (p.hidden_size, p.input_size))

    mask = np.ones((batch, seq)) if mask is None else np.atleast_2d(np.asarray(mask, dtype=np.float64))
    if mask.shape != (batch, seq):
        raise DimensionError("run_lstm", xs.shape, mask.shape)

    state = LstmState.zeros(p.hidden_size, batch)
    silent = Tensor(np.zeros((batch, p.hidden_size)))
    outputs = [None] * seq
    steps = range(seq) if direction == "forward" else range(seq - 1, -1, -1)
    for t in steps:
        m = mask[:, t:t + 1]
        if not m.any():
            outputs[t] = silent
            continue
        new = lstm_cell_step(xs[:, t], state, p)
        if m.all():
            state = new
            outputs[t] = new.h
            continue
        keep = 1.0 - m
        state = LstmState(h=new.h * m + state.h * keep, c=new.c * m + state.c * keep)
        outputs[t] = new.h * m

    out = ops.stack(outputs, axis=1)
    return out[0] if single else out


def run_word_lstm(token_states, p, direction="forward", mask=None):
    return run_lstm(token_states, p, direction=direction, mask=mask)


def run_sentence_lstm(features, p, direction="backward", mask=None):
    features = ops.as_tensor(features)
    if features.shape[-1] != p.input_size:
        raise DimensionError("run_sentence_lstm", features.shape, (p.hidden_size, p.input_size))
    return run_lstm(features, p, direction=direction, mask=mask)


class LSTMLayer(Module):
    """One LSTM level, optionally run in both directions and concatenated"""

    def __init__(self, input_size, hidden_size, rng=None, direction="forward", bidirectional=False):
        if bidirectional:
            self.forward_cell = LSTMCell(input_size, hidden_size, rng)
            self.backward_cell = LSTMCell(input_size, hidden_size, rng)
        else:
            self.cell = LSTMCell(input_size, hidden_size, rng)
        self.direction = direction
        self.bidirectional = bidirectional
        self.input_size = input_size
        self.output_size = hidden_size * (2 if bidirectional else 1)

    def __call__(self, xs, mask=None):
        if not self.bidirectional:
            return run_lstm(xs, self.cell, direction=self.direction, mask=mask)
        fw = run_lstm(xs, self.forward_cell, direction="forward", mask=mask)
        bw = run_lstm(xs, self.backward_cell, direction="backward", mask=mask)
        return ops.concat([fw, bw], axis=-1)

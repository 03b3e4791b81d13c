"""
Clause features: span pooling, lambda-weighted fusion, sentence assembly
"""
import numpy as np

from shorttext.errors import ContractError, DimensionError
from shorttext.models.encoder import EncoderOutput
from shorttext.nn import ops
from shorttext.nn.tensor import Tensor


def clause_repr(states, span, item=0):
    """Mean of the final-layer token states over a clause span

    ``states`` is a (seq x d) tensor for one item, or an EncoderOutput
    whose final layer is read at batch position ``item``.
    """
    if isinstance(states, EncoderOutput):
        states = states.final[item]
    start, end = span
    if end <= start:
        raise ContractError(f"clause span {span} is empty")
    if start < 0 or end > states.shape[0]:
        raise DimensionError("clause_repr", states.shape, (start, end))
    return ops.mean(states[start:end], axis=0)


def clause_fuse(clause_vector, word_hidden, lam):
    """[(1 - lam) * B, lam * h]"""
    if not 0.0 <= lam <= 1.0:
        raise ContractError(f"lam must lie in [0, 1], got {lam}")
    return ops.concat([ops.scale(clause_vector, 1.0 - lam), ops.scale(word_hidden, lam)], axis=-1)


def assemble_sentence_features(clauses, word_hidden_s1):
    """Single clause: the word-level hidden alone; otherwise the fused clauses in order"""
    clauses = list(clauses)
    if not clauses:
        raise ContractError("assemble_sentence_features needs at least one clause")
    if len(clauses) == 1:
        return [word_hidden_s1]
    return clauses


def pad_leading(vector, width):
    """Zero-pad a k-vector into the trailing k slots of a width-vector"""
    missing = width - vector.shape[-1]
    if missing < 0:
        raise DimensionError("pad_leading", vector.shape, (width,))
    if missing == 0:
        return vector
    return ops.concat([Tensor(np.zeros(vector.shape[:-1] + (missing,))), vector], axis=-1)


def clause_anchor(span, direction):
    """Position whose word-level hidden summarises the clause: its last in iteration order"""
    start, end = span
    return end - 1 if direction == "forward" else start

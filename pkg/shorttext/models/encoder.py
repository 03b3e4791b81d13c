"""
Transformer encoder with token, position and segment embeddings
"""
import math
import re
from dataclasses import dataclass, field

import numpy as np

from shorttext.errors import ConfigError, ContractError, DimensionError
from shorttext.nn import ops
from shorttext.nn.module import Embedding, LayerNorm, Linear, Module, constant, weight

_LAYER_RE = re.compile(r"(?:^|\.)layer(\d+)\.")


@dataclass
class EncoderOutput:
    """Per-layer token states (batch x seq x d) and CLS vectors (batch x d)"""
    embeddings: object
    layers: list = field(default_factory=list)
    cls: list = field(default_factory=list)

    @property
    def final(self):
        return self.layers[-1] if self.layers else self.embeddings

    @property
    def final_cls(self):
        return self.cls[-1] if self.cls else self.embeddings[:, 0]


class Embeddings(Module):
    def __init__(self, config, rng=None):
        self.token = Embedding(config.vocab_size, config.hidden, rng)
        self.position = Embedding(config.max_positions, config.hidden, rng)
        if config.segment_embeddings:
            self.segment = Embedding(config.num_segments, config.hidden, rng)
        self.norm = LayerNorm(config.hidden, rng)

    def __call__(self, ids, segment_ids=None):
        ids = np.atleast_2d(np.asarray(ids, dtype=np.int64))
        seq = ids.shape[1]
        max_positions = self.position.table.shape[0]
        if seq > max_positions:
            raise ContractError(f"sequence length {seq} exceeds max positions {max_positions}")

        x = self.token(ids) + self.position(np.arange(seq))
        if hasattr(self, "segment"):
            if segment_ids is None:
                segment_ids = np.zeros_like(ids)
            x = x + self.segment(segment_ids)
        return self.norm(x)


class SelfAttention(Module):
    """Multi-head scaled dot-product self-attention"""

    def __init__(self, hidden, heads, rng=None):
        self.wq = weight(rng, (hidden, hidden), "wq")
        self.bq = constant(rng, (hidden,), "bq")
        self.wk = weight(rng, (hidden, hidden), "wk")
        self.bk = constant(rng, (hidden,), "bk")
        self.wv = weight(rng, (hidden, hidden), "wv")
        self.bv = constant(rng, (hidden,), "bv")
        self.wo = weight(rng, (hidden, hidden), "wo")
        self.bo = constant(rng, (hidden,), "bo")
        self.heads = heads

    def _split(self, x, batch, seq):
        head_dim = x.shape[-1] // self.heads
        return ops.transpose(ops.reshape(x, (batch, seq, self.heads, head_dim)), (0, 2, 1, 3))

    def __call__(self, x, mask, return_weights=False):
        batch, seq, hidden = x.shape
        head_dim = hidden // self.heads
        q = self._split(ops.linear(x, self.wq, self.bq), batch, seq)
        k = self._split(ops.linear(x, self.wk, self.bk), batch, seq)
        v = self._split(ops.linear(x, self.wv, self.bv), batch, seq)

        scores = ops.scale(ops.matmul(q, ops.transpose(k, (0, 1, 3, 2))), 1.0 / math.sqrt(head_dim))
        keys = np.asarray(mask, dtype=bool)[:, None, None, :]
        weights = ops.softmax(scores, axis=-1, mask=keys)

        context = ops.transpose(ops.matmul(weights, v), (0, 2, 1, 3))
        out = ops.linear(ops.reshape(context, (batch, seq, hidden)), self.wo, self.bo)
        if return_weights:
            return out, weights
        return out


class EncoderBlock(Module):
    """Attention then GELU feed-forward, each with residual and post-norm"""

    def __init__(self, config, rng=None):
        self.attn = SelfAttention(config.hidden, config.heads, rng)
        self.attn_norm = LayerNorm(config.hidden, rng)
        self.ff_in = Linear(config.hidden, config.ff_width, rng)
        self.ff_out = Linear(config.ff_width, config.hidden, rng)
        self.ff_norm = LayerNorm(config.hidden, rng)

    def __call__(self, x, mask):
        x = self.attn_norm(x + self.attn(x, mask))
        return self.ff_norm(x + self.ff_out(ops.gelu(self.ff_in(x))))


class Encoder(Module):
    def __init__(self, config, rng=None):
        config.validate()
        self.embeddings = Embeddings(config, rng)
        for index in range(config.num_layers):
            setattr(self, f"layer{index}", EncoderBlock(config, rng))
        self._config = config
        self.name_parameters()
        apply_freeze(self.parameters(), config)

    @property
    def config(self):
        return self._config

    @property
    def blocks(self):
        return [getattr(self, f"layer{i}") for i in range(self._config.num_layers)]

    def embed(self, ids, segment_ids=None):
        return self.embeddings(ids, segment_ids)

    def forward(self, embeddings, mask):
        """Run every block, keeping each layer's output and CLS vector"""
        mask = np.atleast_2d(np.asarray(mask))
        if mask.shape != embeddings.shape[:2]:
            raise DimensionError("encoder_forward", embeddings.shape, mask.shape)
        out = EncoderOutput(embeddings=embeddings)
        x = embeddings
        for block in self.blocks:
            x = block(x, mask)
            out.layers.append(x)
            out.cls.append(x[:, 0])
        return out

    def __call__(self, ids, mask, segment_ids=None):
        return self.forward(self.embed(ids, segment_ids), mask)


def embed(encoder, ids, segment_ids=None):
    return encoder.embed(ids, segment_ids)


def encoder_forward(encoder, embeddings, mask):
    return encoder.forward(embeddings, mask)


def cls_ladder(out):
    """CLS vectors of every layer, first layer first"""
    if not out.cls:
        raise ConfigError("cls-ladder needs at least one encoder layer")
    return list(out.cls)


def classify_cls(x, W):
    """Softmax(W x): the encoder-only classification head"""
    return ops.softmax(ops.linear(x, W), axis=-1)


def layer_index(name):
    """Block index encoded in a parameter name, or None for embeddings"""
    match = _LAYER_RE.search(name)
    return int(match.group(1)) if match else None


def apply_freeze(params, config):
    """Freeze embeddings and every block below ``config.freeze_below``"""
    params = list(params)
    num_layers = config.num_layers
    if not 0 <= config.freeze_below <= num_layers:
        raise ConfigError(
            f"freeze_below must lie in [0, {num_layers}], got {config.freeze_below}",
            {"freeze_below": config.freeze_below},
        )
    for p in params:
        index = layer_index(p.name)
        if index is None:
            p.trainable = config.freeze_below == 0
        else:
            p.trainable = index >= config.freeze_below
    return params

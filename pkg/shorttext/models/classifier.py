"""
The hierarchical classifier: encoder -> word LSTM -> clause fusion ->
sentence LSTM -> max pooling -> softmax
"""
import numpy as np

from shorttext.models.encoder import Encoder, apply_freeze, classify_cls, cls_ladder
from shorttext.models.fusion import (
    assemble_sentence_features,
    clause_anchor,
    clause_fuse,
    clause_repr,
    pad_leading,
)
from shorttext.models.head import ClassifierHead, loss, max_pool_time, one_hot, predict_label
from shorttext.models.lstm import LSTMLayer
from shorttext.nn import ops
from shorttext.nn.module import Module
from shorttext.nn.tensor import Tensor


class HierarchicalClassifier(Module):
    """Short-text classifier in one of three modes

    token-sequence: clause features from the final encoder layer fused
    with word-level LSTM states feed the sentence-level LSTM.
    cls-ladder: the sentence-level LSTM reads the per-layer CLS vectors.
    encoder-only: softmax over the final CLS vector.
    """

    def __init__(self, config, rng=None):
        config.validate()
        self._config = config
        enc = config.encoder
        fusion = config.fusion

        self.encoder = Encoder(enc, rng)
        pooled = enc.hidden
        if fusion.mode == "token-sequence":
            self.word_lstm = LSTMLayer(
                enc.hidden, config.word_hidden, rng,
                direction=fusion.word_direction, bidirectional=fusion.bidirectional,
            )
            sentence_in = enc.hidden + self.word_lstm.output_size
        else:
            sentence_in = enc.hidden
        if fusion.mode != "encoder-only":
            self.sentence_lstm = LSTMLayer(
                sentence_in, config.sentence_hidden, rng,
                direction=fusion.sentence_direction, bidirectional=fusion.bidirectional,
            )
            pooled = self.sentence_lstm.output_size
        if fusion.mode == "encoder-only":
            self.head = ClassifierHead(pooled, config.num_labels, rng, bias=False)
        else:
            self.head = ClassifierHead(pooled, config.num_labels, rng, hidden=config.head_hidden)

        self.name_parameters()
        apply_freeze(self.encoder.parameters(), enc)

    @property
    def config(self):
        return self._config

    @property
    def is_meta(self):
        return any(p.is_meta for p in self.parameters())

    def sentence_features(self, out, word_states, batch):
        """Padded (batch x n_max x width) clause features and their mask"""
        fusion = self._config.fusion
        hidden = self._config.encoder.hidden
        width = hidden + self.word_lstm.output_size
        anchor_direction = "forward" if fusion.bidirectional else fusion.word_direction

        per_item = []
        for b, spans in enumerate(batch.clause_spans):
            states = out.final[b]
            words = word_states[b]
            if not spans:
                # No content clause: fall back to the final CLS state
                cls = states[0]
                per_item.append([ops.concat([cls, Tensor(np.zeros(self.word_lstm.output_size))])])
                continue
            anchors = [clause_anchor(span, anchor_direction) for span in spans]
            fused = [
                clause_fuse(clause_repr(states, span), words[a], fusion.lam)
                for span, a in zip(spans, anchors)
            ]
            features = assemble_sentence_features(fused, words[anchors[0]])
            per_item.append([pad_leading(f, width) for f in features])

        longest = max(len(f) for f in per_item)
        mask = np.zeros((len(per_item), longest))
        blank = Tensor(np.zeros(width))
        rows = []
        for b, features in enumerate(per_item):
            mask[b, :len(features)] = 1.0
            rows.append(ops.stack(features + [blank] * (longest - len(features)), axis=0))
        return ops.stack(rows, axis=0), mask

    def forward(self, batch):
        """Class probabilities (batch x m) for an EncodedBatch"""
        fusion = self._config.fusion
        out = self.encoder(batch.ids, batch.mask, batch.segment_ids)

        if fusion.mode == "encoder-only":
            return classify_cls(out.final_cls, self.head.W)

        if fusion.mode == "cls-ladder":
            features = ops.stack(cls_ladder(out), axis=1)
            mask = np.ones(features.shape[:2])
        else:
            word_states = self.word_lstm(out.final, mask=batch.word_mask())
            features, mask = self.sentence_features(out, word_states, batch)

        H = self.sentence_lstm(features, mask=mask)
        return self.head(max_pool_time(H, mask=mask))

    __call__ = forward

    def regularized_parameters(self):
        return [p for p in self.parameters() if p.trainable and len(p.shape) >= 2]

    def loss(self, batch, labels):
        probs = self.forward(batch)
        targets = one_hot(labels, self._config.num_labels)
        return loss(
            probs, targets,
            phi=self._config.phi,
            regularized_params=self.regularized_parameters(),
            prefactor=self._config.loss_prefactor,
        )

    def predict(self, batch):
        probs = self.forward(batch)
        return predict_label(probs), probs.values

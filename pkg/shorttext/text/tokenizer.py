"""
WordPiece tokenization, clause segmentation and batch encoding
"""
from dataclasses import dataclass, field, replace

import numpy as np

from shorttext.errors import ContractError
from shorttext.text.vocab import (
    CLS_ID,
    CONTINUATION,
    PAD_ID,
    SEP_ID,
    UNK,
    basic_split,
)

DEFAULT_MAX_LEN = 128
MAX_CHARS_PER_WORD = 100
CLAUSE_SEPARATORS = frozenset(".,;?!:")


@dataclass(frozen=True)
class TokenizedText:
    """Token ids wrapped in [CLS] ... [SEP]

    ``word_index`` maps every position to the source word it came from
    (-1 for specials and padding); ``clause_spans`` are half-open ranges
    over ``ids``.
    """
    ids: tuple
    mask: tuple
    word_index: tuple
    clause_spans: tuple = field(default=())

    def __len__(self):
        return len(self.ids)

    @property
    def content_length(self):
        return sum(1 for w in self.word_index if w >= 0)


def wordpiece(word, vocab, max_chars=MAX_CHARS_PER_WORD):
    """Greedy longest-match-first segmentation of one word

    Returns [UNK] alone when any remainder cannot be matched.
    """
    if len(word) > max_chars:
        return [UNK]
    if word in vocab:
        return [word]

    pieces = []
    start = 0
    while start < len(word):
        end = len(word)
        match = None
        while start < end:
            candidate = word[start:end]
            if start > 0:
                candidate = CONTINUATION + candidate
            if candidate in vocab:
                match = candidate
                break
            end -= 1
        if match is None:
            return [UNK]
        pieces.append(match)
        start = end
    return pieces


def tokenize(text, vocab, max_len=DEFAULT_MAX_LEN):
    if max_len < 3:
        raise ContractError(f"max_len must be at least 3, got {max_len}")

    ids, origin = [], []
    for position, word in enumerate(basic_split(text)):
        for piece in wordpiece(word, vocab):
            ids.append(vocab.id_of(piece))
            origin.append(position)

    keep = max_len - 2
    ids = [CLS_ID] + ids[:keep] + [SEP_ID]
    origin = [-1] + origin[:keep] + [-1]
    return TokenizedText(ids=tuple(ids), mask=(1,) * len(ids), word_index=tuple(origin))


def split_clauses(tokens, original_text):
    """Populate clause spans from the punctuation of ``original_text``

    Separator tokens (. , ; ? ! :) close the running clause and belong to
    no clause; empty clauses are dropped.
    """
    words = basic_split(original_text)
    if any(w >= len(words) for w in tokens.word_index):
        raise ContractError("tokens were not produced from this text")

    spans = []
    start = None
    for position, word in enumerate(tokens.word_index):
        if word < 0 or words[word] in CLAUSE_SEPARATORS:
            if start is not None:
                spans.append((start, position))
                start = None
            continue
        if start is None:
            start = position
    if start is not None:
        spans.append((start, len(tokens.word_index)))
    return replace(tokens, clause_spans=tuple(spans))


def encode_text(text, vocab, max_len=DEFAULT_MAX_LEN):
    """tokenize followed by split_clauses"""
    return split_clauses(tokenize(text, vocab, max_len=max_len), text)


def detokenize(ids, vocab):
    """Rejoin pieces into words by vocabulary lookup, dropping specials"""
    words = []
    for token_id in ids:
        if token_id in (PAD_ID, CLS_ID, SEP_ID):
            continue
        token = vocab.token_of(token_id)
        if token.startswith(CONTINUATION) and words:
            words[-1] += token[len(CONTINUATION):]
        else:
            words.append(token)
    return words


@dataclass
class EncodedBatch:
    """Right-padded id and mask matrices with per-item clause spans"""
    ids: np.ndarray
    mask: np.ndarray
    segment_ids: np.ndarray
    clause_spans: list

    @property
    def batch_size(self):
        return self.ids.shape[0]

    @property
    def seq_len(self):
        return self.ids.shape[1]

    def word_mask(self):
        """1 on content tokens: not padding, [CLS] or [SEP]"""
        return self.mask * (self.ids != CLS_ID) * (self.ids != SEP_ID)


def encode_batch(items, max_len=DEFAULT_MAX_LEN):
    items = list(items)
    if not items:
        raise ContractError("encode_batch needs at least one item")
    if max_len < 3:
        raise ContractError(f"max_len must be at least 3, got {max_len}")

    width = min(max(len(item) for item in items), max_len)
    ids = np.full((len(items), width), PAD_ID, dtype=np.int64)
    mask = np.zeros((len(items), width), dtype=np.int64)
    spans = []
    for row, item in enumerate(items):
        item_ids = list(item.ids)
        if len(item_ids) > width:
            item_ids = item_ids[:width - 1] + [SEP_ID]
        ids[row, :len(item_ids)] = item_ids
        mask[row, :len(item_ids)] = 1
        limit = len(item_ids) - 1
        clipped = []
        for start, end in item.clause_spans:
            end = min(end, limit)
            if start < end:
                clipped.append((start, end))
        spans.append(clipped)
    return EncodedBatch(ids=ids, mask=mask, segment_ids=np.zeros_like(ids), clause_spans=spans)

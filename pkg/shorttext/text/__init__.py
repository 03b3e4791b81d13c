"""
Text pipeline: vocabulary, tokenization, clause segmentation, batching
"""
from shorttext.text.vocab import Vocabulary, build_vocab, basic_split
from shorttext.text.tokenizer import (
    TokenizedText,
    EncodedBatch,
    tokenize,
    split_clauses,
    encode_text,
    encode_batch,
    detokenize,
)

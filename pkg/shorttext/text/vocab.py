"""
Vocabulary construction and the plain-text vocabulary file
"""
import hashlib
import logging
import re
from collections import Counter

from shorttext.errors import VocabularyError

logger = logging.getLogger(__name__)

PAD, UNK, CLS, SEP = "[PAD]", "[UNK]", "[CLS]", "[SEP]"
SPECIALS = (PAD, UNK, CLS, SEP)
PAD_ID, UNK_ID, CLS_ID, SEP_ID = range(4)
CONTINUATION = "##"
SUFFIX_LENGTHS = (2, 3, 4)

_WORD_RE = re.compile(r"\w+|[^\w\s]")


def basic_split(text):
    """Lowercase, then split on whitespace and around every punctuation character"""
    return _WORD_RE.findall(text.lower())


class Vocabulary:
    """Dense token <-> id map with the four specials at ids 0..3"""

    def __init__(self, tokens, max_size=None, min_freq=1):
        tokens = list(tokens)
        if tuple(tokens[:4]) != SPECIALS:
            raise VocabularyError(f"vocabulary must start with {', '.join(SPECIALS)}")
        self.tokens = tokens
        self.index = {}
        for i, token in enumerate(tokens):
            if not token or any(c.isspace() for c in token):
                raise VocabularyError(f"invalid token {token!r} at id {i}")
            if token in self.index:
                raise VocabularyError(f"duplicate token {token!r} at id {i}")
            self.index[token] = i
        self.max_size = max_size if max_size is not None else len(tokens)
        self.min_freq = min_freq

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token):
        return token in self.index

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def id_of(self, token):
        return self.index.get(token, UNK_ID)

    def token_of(self, token_id):
        if not 0 <= token_id < len(self.tokens):
            raise VocabularyError(f"id {token_id} out of range for vocabulary of {len(self)}")
        return self.tokens[token_id]

    def to_text(self):
        return "".join(f"{token}\n" for token in self.tokens)

    def digest(self):
        """sha256 of the vocabulary file bytes"""
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()

    def save(self, path):
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(self.to_text())
        except OSError as e:
            raise VocabularyError(f"cannot write vocabulary {path}: {e}") from e
        logger.info("wrote vocabulary of %d tokens to %s", len(self), path)

    @classmethod
    def from_text(cls, text):
        if text and not text.endswith("\n"):
            raise VocabularyError("vocabulary file must end with a newline")
        return cls(text.split("\n")[:-1])

    @classmethod
    def load(cls, path):
        try:
            with open(path, "r", encoding="utf-8", newline="") as fh:
                text = fh.read()
        except OSError as e:
            raise VocabularyError(f"cannot read vocabulary {path}: {e}") from e
        except UnicodeDecodeError as e:
            raise VocabularyError(f"vocabulary {path} is not valid UTF-8: {e}") from e
        return cls.from_text(text)

    def __repr__(self):
        return f"<Vocabulary size={len(self)}>"


def build_vocab(corpus, max_size=30000, min_freq=1):
    """Frequency-ranked whole words plus "##" suffix pieces of the longer ones"""
    corpus = list(corpus)
    if not corpus:
        raise VocabularyError("cannot build a vocabulary from an empty corpus")
    if max_size < len(SPECIALS):
        raise VocabularyError(f"max_size must be at least {len(SPECIALS)}, got {max_size}")
    if min_freq < 1:
        raise VocabularyError(f"min_freq must be at least 1, got {min_freq}")

    counts = Counter()
    for text in corpus:
        counts.update(basic_split(text))

    tokens = list(SPECIALS)
    seen = set(tokens)
    ranked = sorted((w for w, c in counts.items() if c >= min_freq), key=lambda w: (-counts[w], w))
    words = []
    for word in ranked:
        if len(tokens) >= max_size:
            break
        if word in seen:
            continue
        tokens.append(word)
        seen.add(word)
        words.append(word)

    for word in words:
        if len(word) <= 4:
            continue
        for n in SUFFIX_LENGTHS:
            if len(tokens) >= max_size:
                break
            piece = CONTINUATION + word[-n:]
            if piece not in seen:
                tokens.append(piece)
                seen.add(piece)

    logger.debug("built vocabulary: %d words, %d total tokens", len(words), len(tokens))
    return Vocabulary(tokens, max_size=max_size, min_freq=min_freq)

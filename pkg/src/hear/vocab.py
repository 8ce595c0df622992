"""Whitespace/punctuation tokenizer and a corpus-built vocabulary.

Text is lowercased and split on whitespace, with punctuation separated
into standalone tokens, so ``"Is there sound?"`` becomes
``["is", "there", "sound", "?"]``.  The vocabulary maps tokens to dense
ids and reserves six special ids (pad, begin, end, unknown,
classification, mask) at the front of the id space.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

PAD_TOKEN = "<pad>"
BOS_TOKEN = "<bos>"
EOS_TOKEN = "<eos>"
UNK_TOKEN = "<unk>"
CLS_TOKEN = "<cls>"
MASK_TOKEN = "<mask>"

SPECIAL_TOKENS = (PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN, CLS_TOKEN, MASK_TOKEN)

_TOKEN_RE = re.compile(r"[a-z0-9']+|[^\sa-z0-9']")


def tokenize(text: str) -> list[str]:
    """Lowercase and split into word and punctuation tokens."""
    return _TOKEN_RE.findall(text.lower())


@dataclass
class Vocabulary:
    """Token-to-id map with reserved special ids."""

    token_to_id: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for i, tok in enumerate(SPECIAL_TOKENS):
            existing = self.token_to_id.get(tok)
            if existing is not None and existing != i:
                raise ValueError(f"special token {tok!r} must map to id {i}")
            self.token_to_id[tok] = i
        self._id_to_token = {i: t for t, i in self.token_to_id.items()}

    # ids of the special tokens
    @property
    def pad_id(self) -> int:
        return self.token_to_id[PAD_TOKEN]

    @property
    def bos_id(self) -> int:
        return self.token_to_id[BOS_TOKEN]

    @property
    def eos_id(self) -> int:
        return self.token_to_id[EOS_TOKEN]

    @property
    def unk_id(self) -> int:
        return self.token_to_id[UNK_TOKEN]

    @property
    def cls_id(self) -> int:
        return self.token_to_id[CLS_TOKEN]

    @property
    def mask_id(self) -> int:
        return self.token_to_id[MASK_TOKEN]

    def __len__(self) -> int:
        return len(self.token_to_id)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def add(self, token: str) -> int:
        if token not in self.token_to_id:
            new_id = len(self.token_to_id)
            self.token_to_id[token] = new_id
            self._id_to_token[new_id] = token
        return self.token_to_id[token]

    def encode_tokens(self, tokens: Iterable[str]) -> list[int]:
        unk = self.unk_id
        return [self.token_to_id.get(t, unk) for t in tokens]

    def encode(self, text: str) -> list[int]:
        """Tokenize and map to ids; unknown words map to the unknown id."""
        return self.encode_tokens(tokenize(text))

    def decode(self, ids: Sequence[int], skip_special: bool = True) -> str:
        toks = []
        for i in ids:
            tok = self._id_to_token.get(int(i))
            if tok is None:
                raise KeyError(f"id {i} not in vocabulary")
            if skip_special and tok in SPECIAL_TOKENS:
                continue
            toks.append(tok)
        return " ".join(toks)

    def decode_tokens(self, ids: Sequence[int]) -> list[str]:
        return [self._id_to_token[int(i)] for i in ids]

    def to_json(self) -> str:
        return json.dumps(self.token_to_id)

    @classmethod
    def from_json(cls, payload: str) -> "Vocabulary":
        return cls(token_to_id=dict(json.loads(payload)))


def build_vocab(texts: Iterable[str], min_count: int = 1) -> Vocabulary:
    """Build a vocabulary from raw text, most frequent tokens first."""
    counts: dict[str, int] = {}
    for text in texts:
        for tok in tokenize(text):
            counts[tok] = counts.get(tok, 0) + 1
    vocab = Vocabulary()
    for tok, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        if c >= min_count:
            vocab.add(tok)
    return vocab

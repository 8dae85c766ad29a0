"""Tokenization, vocabulary construction, numericalization, batch padding.

Reserved ids are fixed: PAD=0, UNK=1, BOS=2, EOS=3. Source rows carry a
trailing EOS; target rows follow the teacher-forcing shift (tgt_in =
BOS + tokens, tgt_out = tokens + EOS). Padding is always on the right,
with explicit masks marking non-PAD cells.
"""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import IoFailure, UnknownId, VocabularyFrozen

PAD_ID = 0
UNK_ID = 1
BOS_ID = 2
EOS_ID = 3

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
BOS_TOKEN = "<bos>"
EOS_TOKEN = "<eos>"

SPECIAL_TOKENS = (PAD_TOKEN, UNK_TOKEN, BOS_TOKEN, EOS_TOKEN)


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(sentence: str, lowercase: bool = False) -> list[str]:
    """Split a sentence into word and punctuation tokens.

    Leading and trailing punctuation marks are detached from each
    whitespace-delimited chunk as separate single-character tokens;
    interior punctuation (French elision "l'homme", hyphens) stays
    attached. Lowercasing is off by default.
    """
    if lowercase:
        sentence = sentence.lower()
    tokens: list[str] = []
    for chunk in sentence.split():
        lead: list[str] = []
        trail: list[str] = []
        start, end = 0, len(chunk)
        while start < end and _is_punct(chunk[start]):
            lead.append(chunk[start])
            start += 1
        while end > start and _is_punct(chunk[end - 1]):
            trail.append(chunk[end - 1])
            end -= 1
        tokens.extend(lead)
        if start < end:
            tokens.append(chunk[start:end])
        tokens.extend(reversed(trail))
    return tokens


@dataclass
class Vocabulary:
    """Token/id bijection with four reserved specials.

    Ids 0..3 are PAD/UNK/BOS/EOS; real tokens start at 4. Once frozen,
    the mapping rejects insertion.
    """

    id_of: dict[str, int] = field(default_factory=dict)
    token_of: list[str] = field(default_factory=list)
    frozen: bool = False

    def __post_init__(self) -> None:
        if not self.token_of:
            self.token_of = list(SPECIAL_TOKENS)
            self.id_of = {tok: i for i, tok in enumerate(self.token_of)}

    def __len__(self) -> int:
        return len(self.token_of)

    def add(self, token: str) -> int:
        if self.frozen:
            raise VocabularyFrozen(f"cannot add {token!r} to a frozen vocabulary")
        if token in self.id_of:
            return self.id_of[token]
        idx = len(self.token_of)
        self.token_of.append(token)
        self.id_of[token] = idx
        return idx

    def freeze(self) -> "Vocabulary":
        self.frozen = True
        return self

    def encode(self, tokens: Sequence[str]) -> list[int]:
        """Map tokens to ids; unknown tokens become UNK."""
        return [self.id_of.get(tok, UNK_ID) for tok in tokens]

    def decode(self, ids: Sequence[int]) -> list[str]:
        """Map ids back to tokens, specials included; caller strips them."""
        out = []
        for i in ids:
            if not 0 <= i < len(self.token_of):
                raise UnknownId(f"id {i} out of range for vocabulary of size {len(self)}")
            out.append(self.token_of[i])
        return out

    def save(self, path: str | Path) -> None:
        """Write "token TAB id" lines sorted by id, specials included."""
        lines = [f"{tok}\t{idx}" for idx, tok in enumerate(self.token_of)]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise IoFailure(f"cannot read vocabulary file {path}: {exc}") from exc
        token_of: list[str] = []
        for line in text.splitlines():
            if not line:
                continue
            tok, _, idx = line.rpartition("\t")
            if int(idx) != len(token_of):
                raise IoFailure(f"vocabulary file {path} has non-contiguous ids")
            token_of.append(tok)
        vocab = cls(id_of={t: i for i, t in enumerate(token_of)}, token_of=token_of)
        return vocab.freeze()


def build_vocab(token_lists: Iterable[Sequence[str]], min_freq: int = 1) -> Vocabulary:
    """Build a frozen vocabulary from tokenized sentences.

    Tokens with frequency >= min_freq get ids from 4 upward, ordered by
    descending frequency and then lexicographically, so the result is
    deterministic for a given corpus. Build from the training split only.
    """
    counts: Counter[str] = Counter()
    for tokens in token_lists:
        counts.update(tokens)
    vocab = Vocabulary()
    for token, _freq in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        if counts[token] >= min_freq:
            vocab.add(token)
    return vocab.freeze()


EncodedPair = tuple[list[int], list[int]]


def encode_corpus(
    sentence_pairs: Iterable[tuple[str, str]],
    src_vocab: Vocabulary,
    tgt_vocab: Vocabulary,
    lowercase: bool = False,
) -> list[EncodedPair]:
    """Tokenize and numericalize raw sentence pairs (no specials added)."""
    return [
        (src_vocab.encode(tokenize(src, lowercase)), tgt_vocab.encode(tokenize(tgt, lowercase)))
        for src, tgt in sentence_pairs
    ]


@dataclass
class EncodedBatch:
    """Padded id matrices plus masks for one mini-batch.

    src_ids rows are tokens + EOS; tgt_in rows are BOS + tokens and
    tgt_out rows are tokens + EOS (the teacher-forcing shift). Masks are
    1.0 exactly on non-PAD cells.
    """

    src_ids: np.ndarray   # [batch, src_len] int64
    tgt_in_ids: np.ndarray   # [batch, tgt_len] int64
    tgt_out_ids: np.ndarray  # [batch, tgt_len] int64
    src_mask: np.ndarray  # [batch, src_len] float64
    tgt_mask: np.ndarray  # [batch, tgt_len] float64

    @property
    def size(self) -> int:
        return self.src_ids.shape[0]


def pad_batch(pairs: Sequence[EncodedPair], vocab: Vocabulary | None = None) -> EncodedBatch:
    """Assemble encoded pairs into right-padded matrices with masks.

    `vocab` is unused beyond holding the reserved ids, which are fixed
    constants; it is accepted for symmetry with the encode step.
    """
    n = len(pairs)
    src_w = max(len(src) for src, _ in pairs) + 1  # room for EOS
    tgt_w = max(len(tgt) for _, tgt in pairs) + 1  # room for BOS or EOS
    src_ids = np.full((n, src_w), PAD_ID, dtype=np.int64)
    tgt_in = np.full((n, tgt_w), PAD_ID, dtype=np.int64)
    tgt_out = np.full((n, tgt_w), PAD_ID, dtype=np.int64)
    src_mask = np.zeros((n, src_w), dtype=np.float64)
    tgt_mask = np.zeros((n, tgt_w), dtype=np.float64)
    for r, (src, tgt) in enumerate(pairs):
        ls, lt = len(src), len(tgt)
        src_ids[r, :ls] = src
        src_ids[r, ls] = EOS_ID
        src_mask[r, : ls + 1] = 1.0
        tgt_in[r, 0] = BOS_ID
        tgt_in[r, 1 : lt + 1] = tgt
        tgt_out[r, :lt] = tgt
        tgt_out[r, lt] = EOS_ID
        tgt_mask[r, : lt + 1] = 1.0
    return EncodedBatch(src_ids, tgt_in, tgt_out, src_mask, tgt_mask)

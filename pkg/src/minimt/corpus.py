"""Parallel corpus loading, validation, filtering, splitting, statistics.

The interchange format is a pair of UTF-8 text files, one sentence per
line, line i of the source aligned to line i of the target. Text is
NFC-normalized at load so that diacritic encodings cannot fragment the
vocabulary.
"""

from __future__ import annotations

import logging
import math
import random
import unicodedata
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterator, Sequence

from .errors import EmptyCorpus, EncodingFailure, IoFailure, LineCountMismatch
from .text import tokenize

log = logging.getLogger(__name__)

DOMAINS = ("education", "religion", "general", "laws", "legend", "society")

Tokenizer = Callable[[str], list[str]]


@dataclass(frozen=True)
class SentencePair:
    """One aligned sentence pair; both sides are non-empty sentences."""

    source: str
    target: str
    domain: str | None = None


@dataclass
class ParallelCorpus:
    """Ordered list of sentence pairs plus provenance metadata."""

    pairs: list[SentencePair]
    provenance: tuple[str, ...] = ()
    n_dropped: int = 0

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[SentencePair]:
        return iter(self.pairs)

    def sentences(self) -> list[tuple[str, str]]:
        return [(p.source, p.target) for p in self.pairs]


@dataclass(frozen=True)
class SplitSpec:
    """Seeded random train/valid split; train gets ceil(n * fraction)."""

    seed: int
    train_fraction: float = 0.5

    def __post_init__(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError(f"train_fraction must be in (0,1), got {self.train_fraction}")


@dataclass(frozen=True)
class StatsRow:
    domain: str
    language: str
    tokens: int
    average_length: float
    vocabulary: int
    sentences: int


@dataclass
class CorpusStats:
    """Per-language-per-domain token/length/vocabulary/sentence counts."""

    rows: list[StatsRow]

    HEADER = ("domain", "language", "tokens", "average_length", "vocabulary", "sentences")

    def to_table(self, sep: str = "\t") -> str:
        lines = [sep.join(self.HEADER)]
        for r in self.rows:
            lines.append(
                sep.join(
                    [r.domain, r.language, str(r.tokens), f"{r.average_length:.4f}",
                     str(r.vocabulary), str(r.sentences)]
                )
            )
        return "\n".join(lines) + "\n"


def _read_lines(path: str | Path) -> list[str]:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingFailure(f"{path} is not valid UTF-8: {exc}") from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":  # trailing newline is optional
        lines.pop()
    return [unicodedata.normalize("NFC", line.rstrip("\r")) for line in lines]


def read_lines(path: str | Path) -> list[str]:
    """All lines of a UTF-8 text file, NFC-normalized, newline stripped."""
    return _read_lines(path)


def load_sentences(path: str | Path) -> list[str]:
    """Non-blank lines of a one-sentence-per-line file, NFC-normalized."""
    return [line for line in _read_lines(path) if line.strip()]


def load_bitext(
    source_path: str | Path,
    target_path: str | Path,
    domain: str | None = None,
) -> ParallelCorpus:
    """Load an aligned pair of one-sentence-per-line files.

    Pairs where either line is blank are dropped and counted in the
    corpus's n_dropped tally. Raises LineCountMismatch when the files
    disagree on line count.
    """
    src_lines = _read_lines(source_path)
    tgt_lines = _read_lines(target_path)
    if len(src_lines) != len(tgt_lines):
        raise LineCountMismatch(
            f"{source_path} has {len(src_lines)} lines but {target_path} has {len(tgt_lines)}"
        )
    pairs = []
    dropped = 0
    for src, tgt in zip(src_lines, tgt_lines):
        if not src.strip() or not tgt.strip():
            dropped += 1
            continue
        pairs.append(SentencePair(src, tgt, domain))
    if dropped:
        log.info("dropped %d blank pair(s) while loading %s / %s", dropped, source_path, target_path)
    return ParallelCorpus(pairs, provenance=(str(source_path), str(target_path)), n_dropped=dropped)


def save_bitext(corpus: ParallelCorpus, source_path: str | Path, target_path: str | Path) -> None:
    """Write the corpus back out as two aligned one-sentence-per-line files."""
    try:
        Path(source_path).write_text(
            "".join(p.source + "\n" for p in corpus.pairs), encoding="utf-8"
        )
        Path(target_path).write_text(
            "".join(p.target + "\n" for p in corpus.pairs), encoding="utf-8"
        )
    except OSError as exc:
        raise IoFailure(f"cannot write bitext: {exc}") from exc


def compute_stats(
    corpus: ParallelCorpus,
    src_language: str = "source",
    tgt_language: str = "target",
    tokenizer: Tokenizer = tokenize,
) -> CorpusStats:
    """Count tokens, average sentence length, vocabulary and sentences.

    One row per (domain, language); pairs without a domain label are
    grouped under "all". Average length is tokens/sentences; an empty
    corpus yields a single all-zero row per language with average 0.
    """
    by_domain: dict[str, list[SentencePair]] = defaultdict(list)
    for pair in corpus.pairs:
        by_domain[pair.domain or "all"].append(pair)
    if not by_domain:
        by_domain["all"] = []
    rows = []
    for domain in sorted(by_domain):
        group = by_domain[domain]
        for language, side in ((src_language, "source"), (tgt_language, "target")):
            tokens = 0
            vocab: set[str] = set()
            for pair in group:
                toks = tokenizer(getattr(pair, side))
                tokens += len(toks)
                vocab.update(toks)
            n = len(group)
            rows.append(
                StatsRow(
                    domain=domain,
                    language=language,
                    tokens=tokens,
                    average_length=tokens / n if n else 0.0,
                    vocabulary=len(vocab),
                    sentences=n,
                )
            )
    return CorpusStats(rows)


def filter_by_length(
    corpus: ParallelCorpus,
    max_len: int = 50,
    tokenizer: Tokenizer = tokenize,
) -> ParallelCorpus:
    """Keep exactly the pairs where BOTH sides have <= max_len tokens.

    "Exceed" is strict: a pair with a 50-token side survives max_len=50.
    Order is preserved.
    """
    if max_len < 1:
        raise ValueError(f"max_len must be >= 1, got {max_len}")
    kept = [
        p for p in corpus.pairs
        if len(tokenizer(p.source)) <= max_len and len(tokenizer(p.target)) <= max_len
    ]
    return ParallelCorpus(kept, provenance=corpus.provenance, n_dropped=corpus.n_dropped)


def split_train_valid(
    corpus: ParallelCorpus, spec: SplitSpec
) -> tuple[ParallelCorpus, ParallelCorpus]:
    """Seeded uniform shuffle, then cut at ceil(n * train_fraction).

    The two halves are disjoint, cover the corpus, and are identical
    across runs for a fixed seed.
    """
    if not corpus.pairs:
        raise EmptyCorpus("cannot split an empty corpus")
    shuffled = list(corpus.pairs)
    random.Random(spec.seed).shuffle(shuffled)
    n_train = math.ceil(len(shuffled) * spec.train_fraction)
    train = ParallelCorpus(shuffled[:n_train], provenance=corpus.provenance)
    valid = ParallelCorpus(shuffled[n_train:], provenance=corpus.provenance)
    return train, valid

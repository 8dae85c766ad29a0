"""Sentence splitting and hybrid length+dictionary sentence alignment.

The aligner is a dynamic program over (source, target) sentence
positions. Each bead (1-1, 1-0, 0-1, 2-1, 1-2, 2-2) is charged a
length-model cost in the Gale-Church family — character-length ratios
assumed normal around a mean ratio c with variance s^2 — minus a bonus
proportional to dictionary coverage of the bead's source tokens. With
no dictionary the bonus is zero and the aligner degrades to pure
length-based alignment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import ParallelCorpus, SentencePair
from .errors import IoFailure, LadderMismatch, SizeLimitExceeded

# Bead priors in the classic length-based setup: 1-1 dominates, the two
# insertion/deletion kinds share ~1%, merges share 8.9%, 2-2 gets 1.1%.
DEFAULT_BEAD_PRIORS: dict[str, float] = {
    "1-1": 0.89,
    "1-0": 0.0099,
    "0-1": 0.0099,
    "2-1": 0.089 / 2,
    "1-2": 0.089 / 2,
    "2-2": 0.011,
}

# Tie-break order: prefer 1-1, then the remaining kinds lexicographically.
BEAD_KINDS: tuple[str, ...] = ("1-1", "0-1", "1-0", "1-2", "2-1", "2-2")

_MIN_MATCH_PROB = 1e-100


def bead_shape(kind: str) -> tuple[int, int]:
    ds, dt = kind.split("-")
    return int(ds), int(dt)


@dataclass(frozen=True)
class AlignerConfig:
    """Knobs of the alignment cost model.

    mean_length_ratio is expected target chars per source char; it can
    be estimated from the texts with estimate_length_ratio. dict_weight
    scales the dictionary-coverage bonus subtracted from each bead cost.
    """

    mean_length_ratio: float = 1.0
    length_variance: float = 6.8
    bead_priors: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_BEAD_PRIORS)
    )
    dict_weight: float = 1.5
    dictionary: Mapping[str, frozenset[str]] | None = None
    max_cells: int = 4_000_000

    def __post_init__(self) -> None:
        if self.dict_weight < 0:
            raise ValueError("dict_weight must be nonnegative")
        for kind, prior in self.bead_priors.items():
            if prior <= 0:
                raise ValueError(f"bead prior for {kind} must be positive, got {prior}")


@dataclass(frozen=True)
class Bead:
    """One alignment unit: kind plus half-open sentence index ranges."""

    kind: str
    src_span: tuple[int, int]
    tgt_span: tuple[int, int]
    cost: float = 0.0

    def __post_init__(self) -> None:
        ds, dt = bead_shape(self.kind)
        if self.src_span[1] - self.src_span[0] != ds or self.tgt_span[1] - self.tgt_span[0] != dt:
            raise ValueError(f"span sizes do not match bead kind {self.kind}")


@dataclass
class AlignmentLadder:
    """Ordered beads covering both sentence index ranges exactly."""

    beads: list[Bead]
    total_cost: float

    def __len__(self) -> int:
        return len(self.beads)


# -- sentence splitting ------------------------------------------------------

_TERMINALS = ".!?…"
_CLOSERS = "\"'»”’)]"
_OPENER_PUNCT = "«\"“‘'(["

FRENCH_ABBREVIATIONS = frozenset(
    {"M.", "MM.", "Mme.", "Mlle.", "Dr.", "Pr.", "St.", "Ste.", "p.", "art.", "chap."}
)
DEFAULT_ABBREVIATIONS: dict[str, frozenset[str]] = {
    "fr": FRENCH_ABBREVIATIONS,
    "wo": frozenset(),
}


def _is_opener(ch: str) -> bool:
    return ch.isupper() or ch.isdigit() or ch in _OPENER_PUNCT


def _token_before(text: str, end: int) -> str:
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start:end]


def sentence_split(
    text: str,
    lang_hint: str = "fr",
    abbreviations: frozenset[str] | None = None,
) -> list[str]:
    """Split paragraph text into sentences.

    A split happens after sentence-final punctuation (optionally
    followed by closing quotes/brackets) when whitespace and then an
    uppercase letter, digit, or opening quote follows. Words on the
    abbreviation list ("M.", "Dr.", ...) never end a sentence. Never
    returns empty sentences.
    """
    if abbreviations is None:
        abbreviations = DEFAULT_ABBREVIATIONS.get(lang_hint, FRENCH_ABBREVIATIONS)
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _TERMINALS:
            j = i + 1
            while j < n and text[j] in _CLOSERS:
                j += 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            if k > j and k < n and _is_opener(text[k]) and _token_before(text, i + 1) not in abbreviations:
                piece = text[start:j].strip()
                if piece:
                    sentences.append(piece)
                start = k
                i = k
                continue
        i += 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


# -- cost model ---------------------------------------------------------------

def _norm_cdf(z: float) -> float:
    # Abramowitz & Stegun 26.2.17 rational approximation, |error| < 7.5e-8.
    # Valid for z >= 0; callers pass |delta|.
    t = 1.0 / (1.0 + 0.2316419 * z)
    poly = t * (0.319381530 + t * (-0.356563782 + t * (1.781477937 + t * (-1.821255978 + t * 1.330274429))))
    return 1.0 - 0.3989422804014327 * math.exp(-0.5 * z * z) * poly


def length_cost(l_src: int, l_tgt: int, kind: str, cfg: AlignerConfig) -> float:
    """Negative log probability of a bead under the length model.

    For matched kinds the char-length deviation delta = (l_tgt - l_src*c)
    / sqrt(l_src * s^2) (l_src floored at 1) is scored with the two-sided
    normal tail; insertion/deletion kinds pay only their prior.
    """
    prior = cfg.bead_priors[kind]
    ds, dt = bead_shape(kind)
    if ds == 0 or dt == 0:
        return -math.log(prior)
    delta = (l_tgt - l_src * cfg.mean_length_ratio) / math.sqrt(
        max(l_src, 1) * cfg.length_variance
    )
    p = max(2.0 * (1.0 - _norm_cdf(abs(delta))), _MIN_MATCH_PROB)
    return -math.log(prior) - math.log(p)


def _coverage_tokens(sentence: str) -> frozenset[str]:
    toks = set()
    for chunk in sentence.split():
        word = chunk.strip(".,;:!?…()[]«»\"'“”‘’-").casefold()
        if word:
            toks.add(word)
    return frozenset(toks)


def dict_score(
    src_sentences: Sequence[str],
    tgt_sentences: Sequence[str],
    dictionary: Mapping[str, frozenset[str]] | None,
) -> float:
    """Fraction of distinct source tokens with a translation in the target.

    Returns 0 with an empty dictionary or no source tokens, so the
    hybrid cost falls back to pure length alignment.
    """
    if not dictionary:
        return 0.0
    src_tokens: set[str] = set()
    for s in src_sentences:
        src_tokens |= _coverage_tokens(s)
    if not src_tokens:
        return 0.0
    tgt_tokens: set[str] = set()
    for s in tgt_sentences:
        tgt_tokens |= _coverage_tokens(s)
    covered = sum(1 for tok in src_tokens if dictionary.get(tok, frozenset()) & tgt_tokens)
    return covered / len(src_tokens)


def load_dictionary(path: str | Path) -> dict[str, frozenset[str]]:
    """Read a "source_token TAB target_token" dictionary file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read dictionary {path}: {exc}") from exc
    mapping: dict[str, set[str]] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise IoFailure(f"{path}:{lineno}: expected 'source TAB target', got {line!r}")
        src, tgt = parts[0].strip().casefold(), parts[1].strip().casefold()
        if src and tgt:
            mapping.setdefault(src, set()).add(tgt)
    return {k: frozenset(v) for k, v in mapping.items()}


def estimate_length_ratio(src: Sequence[str], tgt: Sequence[str]) -> float:
    """Total target chars over total source chars; 1.0 for empty input."""
    s = sum(len(x) for x in src)
    t = sum(len(x) for x in tgt)
    return t / s if s and t else 1.0


# -- dynamic program ----------------------------------------------------------

def bead_cost(
    src: Sequence[str],
    tgt: Sequence[str],
    i: int,
    j: int,
    kind: str,
    cfg: AlignerConfig,
) -> float:
    """Cost of a bead of the given kind ending at positions (i, j)."""
    ds, dt = bead_shape(kind)
    group_src = src[i - ds : i]
    group_tgt = tgt[j - dt : j]
    l_src = sum(len(s) for s in group_src)
    l_tgt = sum(len(s) for s in group_tgt)
    cost = length_cost(l_src, l_tgt, kind, cfg)
    if cfg.dictionary and ds and dt:
        cost -= cfg.dict_weight * dict_score(group_src, group_tgt, cfg.dictionary)
    return cost


def align_ladder(
    src: Sequence[str],
    tgt: Sequence[str],
    cfg: AlignerConfig | None = None,
) -> AlignmentLadder:
    """Minimum-cost ladder of beads covering both sentence lists.

    Full O(n*m) dynamic program; instances beyond cfg.max_cells DP cells
    raise SizeLimitExceeded. Ties prefer 1-1 beads, then the smaller
    kind lexicographically.
    """
    if cfg is None:
        cfg = AlignerConfig()
    n, m = len(src), len(tgt)
    if n * m > cfg.max_cells:
        raise SizeLimitExceeded(
            f"{n} x {m} sentences = {n * m} DP cells exceeds cap {cfg.max_cells}"
        )
    shapes = [bead_shape(k) for k in BEAD_KINDS]
    inf = math.inf
    best = [[inf] * (m + 1) for _ in range(n + 1)]
    back = [[-1] * (m + 1) for _ in range(n + 1)]
    best[0][0] = 0.0
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 and j == 0:
                continue
            cell_best = inf
            cell_back = -1
            for k, (ds, dt) in enumerate(shapes):
                if i < ds or j < dt:
                    continue
                prev = best[i - ds][j - dt]
                if prev == inf:
                    continue
                cand = prev + bead_cost(src, tgt, i, j, BEAD_KINDS[k], cfg)
                if cand < cell_best:
                    cell_best = cand
                    cell_back = k
            best[i][j] = cell_best
            back[i][j] = cell_back
    beads: list[Bead] = []
    i, j = n, m
    while i > 0 or j > 0:
        k = back[i][j]
        if k < 0:
            raise RuntimeError("alignment DP produced an unreachable cell")
        kind = BEAD_KINDS[k]
        ds, dt = shapes[k]
        beads.append(
            Bead(
                kind,
                (i - ds, i),
                (j - dt, j),
                cost=bead_cost(src, tgt, i, j, kind, cfg),
            )
        )
        i -= ds
        j -= dt
    beads.reverse()
    return AlignmentLadder(beads, total_cost=best[n][m] if beads else 0.0)


def validate_ladder(ladder: AlignmentLadder, n_src: int, n_tgt: int) -> None:
    """Check that bead spans partition [0, n_src) and [0, n_tgt) in order."""
    i = j = 0
    for bead in ladder.beads:
        if bead.src_span[0] != i or bead.tgt_span[0] != j:
            raise LadderMismatch(f"bead {bead} does not continue at ({i}, {j})")
        i, j = bead.src_span[1], bead.tgt_span[1]
    if i != n_src or j != n_tgt:
        raise LadderMismatch(f"ladder covers ({i}, {j}) of ({n_src}, {n_tgt}) sentences")


def extract_pairs(
    ladder: AlignmentLadder,
    src: Sequence[str],
    tgt: Sequence[str],
    only_1_1: bool = False,
    domain: str | None = None,
) -> ParallelCorpus:
    """Turn a ladder into sentence pairs.

    1-1 beads map directly; m-n beads (m, n >= 1) yield one pair of
    space-joined sentences unless only_1_1 is set; insertions and
    deletions yield nothing.
    """
    validate_ladder(ladder, len(src), len(tgt))
    pairs = []
    for bead in ladder.beads:
        ds, dt = bead_shape(bead.kind)
        if ds == 0 or dt == 0:
            continue
        if only_1_1 and bead.kind != "1-1":
            continue
        source = " ".join(src[bead.src_span[0] : bead.src_span[1]])
        target = " ".join(tgt[bead.tgt_span[0] : bead.tgt_span[1]])
        pairs.append(SentencePair(source, target, domain))
    return ParallelCorpus(pairs)


# -- ladder file format -------------------------------------------------------

def write_ladder(ladder: AlignmentLadder, path: str | Path) -> None:
    """Write "kind TAB s0-s1 TAB t0-t1 TAB cost" lines (half-open spans)."""
    lines = [
        f"{b.kind}\t{b.src_span[0]}-{b.src_span[1]}\t{b.tgt_span[0]}-{b.tgt_span[1]}\t{b.cost:.6f}"
        for b in ladder.beads
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_ladder(path: str | Path) -> AlignmentLadder:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read ladder {path}: {exc}") from exc
    beads = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            kind, src_span, tgt_span, cost = line.split("\t")
            s0, s1 = (int(x) for x in src_span.split("-"))
            t0, t1 = (int(x) for x in tgt_span.split("-"))
            beads.append(Bead(kind, (s0, s1), (t0, t1), cost=float(cost)))
        except ValueError as exc:
            raise IoFailure(f"{path}:{lineno}: malformed ladder line {line!r}") from exc
    return AlignmentLadder(beads, total_cost=sum(b.cost for b in beads))

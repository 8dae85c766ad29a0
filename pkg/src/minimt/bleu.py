"""Cumulative BLEU with brevity penalty and exponential zero-count smoothing.

Scores are computed at sentence level against a single reference and
macro-averaged over the corpus. Zero n-gram counts are replaced by
values that halve with each additional zero order and scale with
ln(hypothesis length) / k — the smoothing that keeps short hypotheses
from collapsing every higher-order score to zero. Hypotheses with no
unigram match at all score 0 regardless of smoothing, matching the
behavior of the established reference implementations.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .errors import CountMismatch

BLEU1_WEIGHTS = (1.0, 0.0, 0.0, 0.0)
BLEU2_WEIGHTS = (0.5, 0.5, 0.0, 0.0)
BLEU3_WEIGHTS = (1 / 3, 1 / 3, 1 / 3, 0.0)
BLEU4_WEIGHTS = (0.25, 0.25, 0.25, 0.25)
CUMULATIVE_WEIGHTS = (BLEU1_WEIGHTS, BLEU2_WEIGHTS, BLEU3_WEIGHTS, BLEU4_WEIGHTS)

MAX_ORDER = 4
SMOOTHING_K = 5.0


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def modified_precision(hyp: Sequence[str], ref: Sequence[str], n: int) -> tuple[int, int]:
    """Clipped n-gram match count and hypothesis n-gram count.

    Each hypothesis n-gram counts at most as often as it appears in the
    (single) reference. The raw denominator is max(0, len(hyp) - n + 1).
    """
    if n < 1:
        raise ValueError(f"n-gram order must be >= 1, got {n}")
    hyp_counts = _ngrams(hyp, n)
    ref_counts = _ngrams(ref, n)
    clipped = sum(min(count, ref_counts[gram]) for gram, count in hyp_counts.items())
    return clipped, max(0, len(hyp) - n + 1)


@dataclass
class NGramProfile:
    """Clipped numerators and raw denominators for orders 1..4."""

    numerators: tuple[int, ...]
    denominators: tuple[int, ...]

    @classmethod
    def of(cls, hyp: Sequence[str], ref: Sequence[str], max_order: int = MAX_ORDER) -> "NGramProfile":
        nums, dens = [], []
        for n in range(1, max_order + 1):
            num, den = modified_precision(hyp, ref, n)
            nums.append(num)
            dens.append(den)
        return cls(tuple(nums), tuple(dens))


def brevity_penalty(hyp_len: int, ref_len: int) -> float:
    """exp(1 - ref_len/hyp_len) for short hypotheses, otherwise 1.

    An empty hypothesis returns 0; callers treat that case as BLEU 0.
    """
    if hyp_len >= ref_len:
        return 1.0
    if hyp_len == 0:
        return 0.0
    return math.exp(1.0 - ref_len / hyp_len)


def smooth_method4(
    precisions: Sequence[tuple[int, int]],
    hyp_len: int,
    k: float = SMOOTHING_K,
) -> list[float]:
    """Replace zero-count precisions by exponentially shrinking values.

    With a counter starting at 1, each ascending order whose numerator
    is 0 becomes (1 / (2^counter * k / ln(hyp_len))) / denominator and
    bumps the counter. Nonzero precisions pass through untouched, and a
    hypothesis of length <= 1 is not smoothed at all (zeros stay zero).
    Denominators are floored at 1 for the division, as in the reference
    formulation.
    """
    out = []
    counter = 1
    for num, den in precisions:
        den = max(1, den)
        if num == 0 and hyp_len > 1:
            out.append((1.0 / (2.0**counter * k / math.log(hyp_len))) / den)
            counter += 1
        else:
            out.append(num / den)
    return out


def cumulative_bleu(
    hyp: Sequence[str],
    ref: Sequence[str],
    weights: Sequence[float] = BLEU4_WEIGHTS,
    k: float = SMOOTHING_K,
) -> float:
    """Brevity penalty times the weighted geometric mean of smoothed precisions.

    A hypothesis with no unigram match (or no tokens) scores 0 before
    smoothing is even considered; any remaining zero precision under a
    positive weight also forces 0.
    """
    profile = NGramProfile.of(hyp, ref, max_order=len(weights))
    if not hyp or profile.numerators[0] == 0:
        return 0.0
    smoothed = smooth_method4(list(zip(profile.numerators, profile.denominators)), len(hyp), k)
    log_sum = 0.0
    for w, p in zip(weights, smoothed):
        if w <= 0.0:
            continue
        if p == 0.0:
            return 0.0
        log_sum += w * math.log(p)
    return brevity_penalty(len(hyp), len(ref)) * math.exp(log_sum)


@dataclass
class BleuReport:
    """Corpus-level evaluation summary.

    bleu1..bleu4 are macro-averaged sentence scores in [0, 1]; the
    tabular output reports them x100. precisions holds the corpus-total
    per-order (numerator, denominator) counts for inspection.
    """

    bleu1: float
    bleu2: float
    bleu3: float
    bleu4: float
    brevity_penalty: float
    precisions: tuple[tuple[int, int], ...]
    sentences: int
    token_accuracy: float | None = None

    def scores(self) -> tuple[float, float, float, float]:
        return (self.bleu1, self.bleu2, self.bleu3, self.bleu4)

    def to_row(self, model: str = "-", sep: str = "\t") -> str:
        acc = f"{100 * self.token_accuracy:.2f}" if self.token_accuracy is not None else "-"
        cells = [model, acc] + [f"{100 * s:.2f}" for s in self.scores()]
        return sep.join(cells)

    ROW_HEADER = ("model", "accuracy", "bleu1", "bleu2", "bleu3", "bleu4")


def evaluate_corpus(
    hypotheses: Sequence[Sequence[str]],
    references: Sequence[Sequence[str]],
    token_accuracy: float | None = None,
    k: float = SMOOTHING_K,
) -> BleuReport:
    """Macro-averaged sentence-level cumulative BLEU-1..4 over a corpus."""
    if len(hypotheses) != len(references):
        raise CountMismatch(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise CountMismatch("evaluation needs at least one sentence pair")
    sums = [0.0, 0.0, 0.0, 0.0]
    totals = [[0, 0] for _ in range(MAX_ORDER)]
    hyp_len_total = 0
    ref_len_total = 0
    for hyp, ref in zip(hypotheses, references):
        for i, weights in enumerate(CUMULATIVE_WEIGHTS):
            sums[i] += cumulative_bleu(hyp, ref, weights, k)
        profile = NGramProfile.of(hyp, ref)
        for i in range(MAX_ORDER):
            totals[i][0] += profile.numerators[i]
            totals[i][1] += profile.denominators[i]
        hyp_len_total += len(hyp)
        ref_len_total += len(ref)
    n = len(hypotheses)
    return BleuReport(
        bleu1=sums[0] / n,
        bleu2=sums[1] / n,
        bleu3=sums[2] / n,
        bleu4=sums[3] / n,
        brevity_penalty=brevity_penalty(hyp_len_total, ref_len_total),
        precisions=tuple((num, den) for num, den in totals),
        sentences=n,
        token_accuracy=token_accuracy,
    )

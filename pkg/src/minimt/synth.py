"""Synthetic data generators for benchmarks and acceptance checks.

Two families: copy-task bitexts (target = source under a token
remapping) for overfitting runs, and alignment bitexts with planted
insertion/deletion/merge beads and ground-truth ladders.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .align import Bead


def copy_task_bitext(
    n_pairs: int = 32,
    vocab_size: int = 12,
    min_len: int = 3,
    max_len: int = 6,
    seed: int = 0,
) -> list[tuple[str, str]]:
    """Sentence pairs where the target is the source under a token rename.

    Source tokens are "s0".."s{V-1}", targets the matching "t*" tokens,
    so a model solves the task exactly by learning the bijection and
    copying. All pairs are distinct as sequences.
    """
    rng = np.random.default_rng(seed)
    seen = set()
    pairs: list[tuple[str, str]] = []
    while len(pairs) < n_pairs:
        length = int(rng.integers(min_len, max_len + 1))
        ids = tuple(int(x) for x in rng.integers(0, vocab_size, size=length))
        if ids in seen:
            continue
        seen.add(ids)
        pairs.append(
            (" ".join(f"s{i}" for i in ids), " ".join(f"t{i}" for i in ids))
        )
    return pairs


def _sentence_of_length(rng: np.random.Generator, n_chars: int, prefix: str) -> str:
    # Words of ~6 chars + separating spaces, padded to the exact length.
    words = []
    remaining = n_chars
    k = 0
    while remaining > 0:
        w = min(6, remaining)
        words.append(f"{prefix}{k}"[:w].ljust(w, "x"))
        remaining -= w + 1
        k += 1
    return " ".join(words)[:n_chars]


@dataclass
class PlantedBitext:
    """A synthetic alignment instance and its ground-truth ladder."""

    src: list[str]
    tgt: list[str]
    beads: list[Bead]

    def planted_1_1(self) -> set[tuple[tuple[int, int], tuple[int, int]]]:
        return {(b.src_span, b.tgt_span) for b in self.beads if b.kind == "1-1"}


def planted_alignment(
    n_sentences: int = 40,
    mean_length_ratio: float = 1.0,
    noise_sd: float = 4.0,
    p_delete: float = 0.05,
    p_insert: float = 0.05,
    p_merge: float = 0.05,
    seed: int = 0,
) -> PlantedBitext:
    """Build a bitext whose true ladder mixes 1-1, 1-0, 0-1 and 2-1 beads.

    Source character lengths are drawn uniformly in [25, 70]; each
    matched target length is source * ratio + Gaussian noise. Deletions
    drop a target sentence, insertions add a spurious one, merges join
    two consecutive sources into one target.
    """
    rng = np.random.default_rng(seed)
    src: list[str] = []
    tgt: list[str] = []
    beads: list[Bead] = []
    i = 0
    remaining = n_sentences
    while remaining > 0:
        roll = rng.random()
        src_len = int(rng.integers(25, 71))
        if roll < p_delete:
            src.append(_sentence_of_length(rng, src_len, f"s{i}w"))
            beads.append(Bead("1-0", (len(src) - 1, len(src)), (len(tgt), len(tgt))))
            i += 1
            remaining -= 1
        elif roll < p_delete + p_insert:
            tgt_len = int(rng.integers(25, 71))
            tgt.append(_sentence_of_length(rng, tgt_len, f"t{i}x"))
            beads.append(Bead("0-1", (len(src), len(src)), (len(tgt) - 1, len(tgt))))
        elif roll < p_delete + p_insert + p_merge and remaining >= 2:
            other = int(rng.integers(25, 71))
            src.append(_sentence_of_length(rng, src_len, f"s{i}w"))
            src.append(_sentence_of_length(rng, other, f"s{i + 1}w"))
            total = (src_len + other) * mean_length_ratio + rng.normal(0.0, noise_sd)
            tgt.append(_sentence_of_length(rng, max(8, int(round(total))), f"t{i}m"))
            beads.append(Bead("2-1", (len(src) - 2, len(src)), (len(tgt) - 1, len(tgt))))
            i += 2
            remaining -= 2
        else:
            src.append(_sentence_of_length(rng, src_len, f"s{i}w"))
            tgt_len = src_len * mean_length_ratio + rng.normal(0.0, noise_sd)
            tgt.append(_sentence_of_length(rng, max(8, int(round(tgt_len))), f"t{i}x"))
            beads.append(Bead("1-1", (len(src) - 1, len(src)), (len(tgt) - 1, len(tgt))))
            i += 1
            remaining -= 1
    return PlantedBitext(src, tgt, beads)

"""Mini-batch training: Adam with weight decay, clipping, early stopping.

Each epoch reshuffles the training pairs with a seeded generator, runs
teacher-forced forward/backward per batch (dropout on), clips the joint
gradient norm and applies one Adam step. Validation loss and token
accuracy are measured with dropout off at every epoch end; the
parameters returned are the snapshot from the best-accuracy epoch.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyCorpus, EmptyMask, NonFiniteDetected
from .nn import (
    Gradients,
    ModelConfig,
    Parameters,
    backward,
    decode_train,
    encode_source,
    init_params,
    masked_cross_entropy,
    save_checkpoint,
)
from .text import EncodedPair, pad_batch

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingConfig:
    """Optimization hyper-parameters; every value is surfaced on the CLI."""

    learning_rate: float = 1e-3
    batch_size: int = 128
    max_epochs: int = 100
    patience: int = 5
    max_grad_norm: float = 5.0
    weight_decay: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.learning_rate, self.batch_size, self.max_epochs,
               self.patience, self.max_grad_norm) <= 0:
            raise ValueError("learning_rate, batch_size, max_epochs, patience, "
                             "max_grad_norm must all be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be nonnegative")
        if self.patience > self.max_epochs:
            raise ValueError("patience cannot exceed max_epochs")


@dataclass
class AdamState:
    """First/second moment tensors and the step counter."""

    m: Gradients
    v: Gradients
    t: int = 0

    @classmethod
    def for_params(cls, params: Parameters) -> "AdamState":
        return cls(
            m={k: np.zeros_like(p) for k, p in params.items()},
            v={k: np.zeros_like(p) for k, p in params.items()},
        )


def _decayable(name: str, tensor: np.ndarray) -> bool:
    # Biases and embeddings are exempt from weight decay; without the
    # exemption, rarely used embedding rows (UNK, PAD) drift to zero.
    return tensor.ndim > 1 and not name.endswith("embedding")


def clip_gradients(grads: Gradients, max_norm: float) -> tuple[Gradients, float]:
    """Scale all tensors jointly so the global L2 norm is <= max_norm.

    Returns the clipped gradients and the pre-clip global norm.
    """
    if max_norm <= 0:
        raise ValueError("max_norm must be positive")
    sq = sum(float(np.sum(g * g)) for g in grads.values())
    norm = math.sqrt(sq)
    if norm <= max_norm:
        return grads, norm
    scale = max_norm / norm
    return {k: g * scale for k, g in grads.items()}, norm


def adam_step(
    params: Parameters,
    grads: Gradients,
    state: AdamState,
    cfg: TrainingConfig,
) -> tuple[Parameters, AdamState]:
    """One Adam update with coupled L2 weight decay.

    Decay is added to the gradient before the moment updates and skips
    embeddings and biases. Updates params and state in place and returns
    them.
    """
    state.t += 1
    b1, b2 = cfg.beta1, cfg.beta2
    bias1 = 1.0 - b1**state.t
    bias2 = 1.0 - b2**state.t
    for name, p in params.items():
        g = grads[name]
        if cfg.weight_decay > 0.0 and _decayable(name, p):
            g = g + cfg.weight_decay * p
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        update = cfg.learning_rate * (m / bias1) / (np.sqrt(v / bias2) + cfg.eps)
        if not np.isfinite(update).all():
            raise NonFiniteDetected(f"non-finite Adam update for {name}")
        p -= update
    return params, state


def token_accuracy(logits: np.ndarray, tgt_out: np.ndarray, tgt_mask: np.ndarray) -> float:
    """Fraction of non-PAD positions where argmax(logits) hits the gold id.

    np.argmax breaks ties toward the lowest id.
    """
    n = tgt_mask.sum()
    if n == 0:
        raise EmptyMask("accuracy over a batch with no non-PAD targets")
    pred = np.argmax(logits, axis=-1)
    return float(((pred == tgt_out) * tgt_mask).sum() / n)


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    valid_loss: float
    valid_accuracy: float


@dataclass
class TrainReport:
    """Per-epoch log plus which epoch's snapshot was returned."""

    epochs: list[EpochStats] = field(default_factory=list)
    best_epoch: int = 0
    stopped_early: bool = False
    stop_reason: str = ""

    def to_table(self, sep: str = "\t") -> str:
        lines = [sep.join(("epoch", "train_loss", "valid_loss", "valid_accuracy"))]
        for e in self.epochs:
            lines.append(
                sep.join((str(e.epoch), f"{e.train_loss:.6f}",
                          f"{e.valid_loss:.6f}", f"{e.valid_accuracy:.6f}"))
            )
        return "\n".join(lines) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_table(), encoding="utf-8")


def _batches(pairs: list[EncodedPair], batch_size: int):
    for start in range(0, len(pairs), batch_size):
        yield pad_batch(pairs[start : start + batch_size])


def evaluate_split(pairs: list[EncodedPair], params: Parameters, cfg: ModelConfig,
                   batch_size: int = 128) -> tuple[float, float]:
    """Loss and token accuracy over a split, dropout off, teacher forced."""
    loss_sum = 0.0
    correct = 0.0
    total = 0.0
    for batch in _batches(pairs, batch_size):
        enc = encode_source(batch.src_ids, batch.src_mask, params, cfg)
        logits = decode_train(batch.tgt_in_ids, batch.tgt_mask, enc, params, cfg)
        loss, _ = masked_cross_entropy(logits, batch.tgt_out_ids, batch.tgt_mask)
        n = batch.tgt_mask.sum()
        loss_sum += loss * n
        pred = np.argmax(logits, axis=-1)
        correct += ((pred == batch.tgt_out_ids) * batch.tgt_mask).sum()
        total += n
    if total == 0:
        raise EmptyMask("validation split has no target tokens")
    return loss_sum / total, float(correct / total)


def train(
    model_cfg: ModelConfig,
    train_pairs: list[EncodedPair],
    valid_pairs: list[EncodedPair],
    cfg: TrainingConfig,
    snapshot_dir: str | Path | None = None,
) -> tuple[Parameters, TrainReport]:
    """Full training loop; returns the best-accuracy snapshot and the log.

    Stops when the validation accuracy has not improved for `patience`
    consecutive epochs, at max_epochs, or on a numeric failure (the last
    good snapshot is still returned). When snapshot_dir is given, a
    checkpoint is written there at every new best epoch, named with the
    epoch and its accuracy.
    """
    if not train_pairs or not valid_pairs:
        raise EmptyCorpus("training and validation splits must be non-empty")
    rng = np.random.default_rng(cfg.seed)
    params = init_params(model_cfg, cfg.seed)
    state = AdamState.for_params(params)
    report = TrainReport()
    best_params = params.copy()
    best_accuracy = -math.inf
    bad_epochs = 0
    order = np.arange(len(train_pairs))
    for epoch in range(1, cfg.max_epochs + 1):
        rng.shuffle(order)
        shuffled = [train_pairs[i] for i in order]
        loss_sum = 0.0
        token_sum = 0.0
        try:
            for batch in _batches(shuffled, cfg.batch_size):
                loss, grads = backward(batch, params, model_cfg, rng=rng, dropout_on=True)
                grads, _ = clip_gradients(grads, cfg.max_grad_norm)
                params, state = adam_step(params, grads, state, cfg)
                n = batch.tgt_mask.sum()
                loss_sum += loss * n
                token_sum += n
        except NonFiniteDetected as exc:
            report.stopped_early = True
            report.stop_reason = f"aborted: {exc}"
            log.warning("epoch %d aborted (%s); keeping best snapshot", epoch, exc)
            break
        valid_loss, valid_accuracy = evaluate_split(
            valid_pairs, params, model_cfg, cfg.batch_size
        )
        report.epochs.append(
            EpochStats(epoch, loss_sum / token_sum, valid_loss, valid_accuracy)
        )
        log.info("epoch %d: train_loss=%.4f valid_loss=%.4f valid_acc=%.4f",
                 epoch, loss_sum / token_sum, valid_loss, valid_accuracy)
        if valid_accuracy > best_accuracy:
            best_accuracy = valid_accuracy
            best_params = params.copy()
            report.best_epoch = epoch
            bad_epochs = 0
            if snapshot_dir is not None:
                name = f"epoch{epoch:03d}_acc{valid_accuracy:.4f}.ckpt"
                save_checkpoint(Path(snapshot_dir) / name, best_params, model_cfg, cfg.seed)
        else:
            bad_epochs += 1
            if bad_epochs >= cfg.patience:
                report.stopped_early = True
                report.stop_reason = f"no accuracy gain for {cfg.patience} epochs"
                break
    return best_params, report

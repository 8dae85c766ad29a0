"""LSTM encoder-decoder with exact hand-written reverse-mode gradients.

Four variants share one code path: unidirectional or bidirectional
encoder, with or without multiplicative attention. The decoder never
feeds the attention context back into its recurrence, so the LSTM state
sequence is identical across attentional and plain variants; attention
only changes the features projected to the output logits.

All compute is float64 numpy. Padding is handled by carry-through
gating: at PAD steps the recurrent state is carried unchanged, which
keeps losses, gradients and decoder initialization independent of
anything stored at PAD positions.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import AllPadded, EmptyMask, IoFailure, NonFiniteDetected
from .text import BOS_ID, EOS_ID, EncodedBatch

Array = np.ndarray
Gradients = dict[str, Array]

CHECKPOINT_MAGIC = "minimt-checkpoint"
CHECKPOINT_VERSION = 1
INIT_SCALE = 0.08


@dataclass(frozen=True)
class ModelConfig:
    """Architecture switches and sizes for one model variant."""

    src_vocab_size: int
    tgt_vocab_size: int
    embed_dim: int = 128
    hidden_dim: int = 300
    bidirectional: bool = False
    attention: bool = False
    dropout_rate: float = 0.2
    max_decode_len: int = 50

    def __post_init__(self) -> None:
        if min(self.embed_dim, self.hidden_dim, self.src_vocab_size, self.tgt_vocab_size) <= 0:
            raise ValueError("all dimensions must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0,1), got {self.dropout_rate}")

    @property
    def enc_out_dim(self) -> int:
        return 2 * self.hidden_dim if self.bidirectional else self.hidden_dim

    @property
    def feature_dim(self) -> int:
        return self.hidden_dim + self.enc_out_dim if self.attention else self.hidden_dim

    @property
    def variant(self) -> str:
        name = "lstm"
        if self.bidirectional:
            name += "+bidirectional"
        if self.attention:
            name += "+attention"
        return name


def param_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    """Canonical tensor names and shapes; order fixes checkpoint layout."""
    E, H = cfg.embed_dim, cfg.hidden_dim
    shapes: dict[str, tuple[int, ...]] = {
        "src_embedding": (cfg.src_vocab_size, E),
        "tgt_embedding": (cfg.tgt_vocab_size, E),
        "enc_fwd_Wx": (4 * H, E),
        "enc_fwd_Wh": (4 * H, H),
        "enc_fwd_b": (4 * H,),
    }
    if cfg.bidirectional:
        shapes.update(
            {
                "enc_bwd_Wx": (4 * H, E),
                "enc_bwd_Wh": (4 * H, H),
                "enc_bwd_b": (4 * H,),
                "bridge_h_W": (H, 2 * H),
                "bridge_h_b": (H,),
                "bridge_c_W": (H, 2 * H),
                "bridge_c_b": (H,),
            }
        )
    shapes.update(
        {
            "dec_Wx": (4 * H, E),
            "dec_Wh": (4 * H, H),
            "dec_b": (4 * H,),
        }
    )
    if cfg.attention:
        shapes["att_W"] = (cfg.enc_out_dim, H)
    shapes.update(
        {
            "out_W": (cfg.tgt_vocab_size, cfg.feature_dim),
            "out_b": (cfg.tgt_vocab_size,),
        }
    )
    return shapes


_LSTM_BIASES = ("enc_fwd_b", "enc_bwd_b", "dec_b")


class Parameters:
    """Named dense tensors; shapes are determined by ModelConfig alone."""

    def __init__(self, tensors: dict[str, Array]):
        self.tensors = dict(tensors)

    def __getitem__(self, name: str) -> Array:
        return self.tensors[name]

    def __contains__(self, name: str) -> bool:
        return name in self.tensors

    def names(self) -> list[str]:
        return list(self.tensors)

    def items(self):
        return self.tensors.items()

    def copy(self) -> "Parameters":
        return Parameters({k: v.copy() for k, v in self.tensors.items()})

    def n_scalars(self) -> int:
        return sum(v.size for v in self.tensors.values())


def init_params(cfg: ModelConfig, seed: int) -> Parameters:
    """Uniform(-0.08, 0.08) weights; zero biases except forget gate = 1."""
    rng = np.random.default_rng(seed)
    H = cfg.hidden_dim
    tensors: dict[str, Array] = {}
    for name, shape in param_shapes(cfg).items():
        if len(shape) == 1:
            t = np.zeros(shape, dtype=np.float64)
            if name in _LSTM_BIASES:
                t[H : 2 * H] = 1.0  # forget gate: start by remembering
        else:
            t = rng.uniform(-INIT_SCALE, INIT_SCALE, size=shape)
        tensors[name] = t
    return Parameters(tensors)


def zero_gradients(params: Parameters) -> Gradients:
    return {k: np.zeros_like(v) for k, v in params.items()}


def _sigmoid(x: Array) -> Array:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


# -- LSTM cell and sequence runner -------------------------------------------

def _cell_forward(x, h_prev, c_prev, Wx, Wh, b):
    H = h_prev.shape[-1]
    a = x @ Wx.T + h_prev @ Wh.T + b
    i = _sigmoid(a[..., :H])
    f = _sigmoid(a[..., H : 2 * H])
    g = np.tanh(a[..., 2 * H : 3 * H])
    o = _sigmoid(a[..., 3 * H :])
    c = f * c_prev + i * g
    tc = np.tanh(c)
    h = o * tc
    return h, c, (i, f, g, o, tc)


def lstm_cell(
    x: Array,
    h_prev: Array,
    c_prev: Array,
    weights: tuple[Array, Array, Array],
) -> tuple[Array, Array]:
    """One LSTM step: gates in (input, forget, cell, output) order.

    Accepts a single vector or a batch of rows; weights are (Wx [4HxE],
    Wh [4HxH], b [4H]).
    """
    Wx, Wh, b = weights
    h, c, _ = _cell_forward(x, h_prev, c_prev, Wx, Wh, b)
    return h, c


@dataclass
class _LstmTrace:
    """Per-step activations recorded during an LSTM run, for backprop."""

    X: Array      # [B,T,E] inputs
    mask: Array   # [B,T]
    h0: Array     # [B,H]
    c0: Array     # [B,H]
    I: Array      # gate activations, each [B,T,H]
    F: Array
    G: Array
    O: Array
    TC: Array     # tanh(c_new)
    Cnew: Array   # pre-gating cell states
    Hs: Array     # gated hidden states [B,T,H]
    Cs: Array     # gated cell states [B,T,H]

    def h_prev(self, t: int) -> Array:
        return self.Hs[:, t - 1] if t > 0 else self.h0

    def c_prev(self, t: int) -> Array:
        return self.Cs[:, t - 1] if t > 0 else self.c0


def _lstm_run(X: Array, mask: Array, Wx: Array, Wh: Array, b: Array,
              h0: Array | None = None, c0: Array | None = None) -> _LstmTrace:
    """Run an LSTM over [B,T,*] inputs with carry-through at masked steps."""
    B, T, _ = X.shape
    H = Wh.shape[1]
    h = np.zeros((B, H)) if h0 is None else h0
    c = np.zeros((B, H)) if c0 is None else c0
    tr = _LstmTrace(
        X=X, mask=mask, h0=h, c0=c,
        I=np.empty((B, T, H)), F=np.empty((B, T, H)), G=np.empty((B, T, H)),
        O=np.empty((B, T, H)), TC=np.empty((B, T, H)), Cnew=np.empty((B, T, H)),
        Hs=np.empty((B, T, H)), Cs=np.empty((B, T, H)),
    )
    for t in range(T):
        h_new, c_new, (i, f, g, o, tc) = _cell_forward(X[:, t], h, c, Wx, Wh, b)
        m = mask[:, t : t + 1]
        h = m * h_new + (1.0 - m) * h
        c = m * c_new + (1.0 - m) * c
        tr.I[:, t], tr.F[:, t], tr.G[:, t], tr.O[:, t] = i, f, g, o
        tr.TC[:, t], tr.Cnew[:, t] = tc, c_new
        tr.Hs[:, t], tr.Cs[:, t] = h, c
    return tr


def _lstm_backward(tr: _LstmTrace, Wx: Array, Wh: Array,
                   dHs: Array | None, dh_last: Array, dc_last: Array):
    """Backprop through a recorded LSTM run.

    dHs carries per-step gradients on the gated hidden states (None for
    zero); dh_last/dc_last are gradients on the final states. Returns
    (dX, dWx, dWh, db, dh0, dc0).
    """
    B, T, _ = tr.X.shape
    dWx = np.zeros_like(Wx)
    dWh = np.zeros_like(Wh)
    db = np.zeros(Wx.shape[0])
    dX = np.zeros_like(tr.X)
    dh = dh_last.copy()
    dc = dc_last.copy()
    for t in reversed(range(T)):
        dh_t = dh + dHs[:, t] if dHs is not None else dh
        dc_t = dc
        m = tr.mask[:, t : t + 1]
        i, f, g, o = tr.I[:, t], tr.F[:, t], tr.G[:, t], tr.O[:, t]
        tc = tr.TC[:, t]
        c_prev = tr.c_prev(t)
        dh_new = m * dh_t
        dc_new = m * dc_t + dh_new * o * (1.0 - tc * tc)
        da_i = dc_new * g * i * (1.0 - i)
        da_f = dc_new * c_prev * f * (1.0 - f)
        da_g = dc_new * i * (1.0 - g * g)
        da_o = dh_new * tc * o * (1.0 - o)
        dA = np.concatenate([da_i, da_f, da_g, da_o], axis=1)  # [B,4H]
        x_t = tr.X[:, t]
        dWx += dA.T @ x_t
        dWh += dA.T @ tr.h_prev(t)
        db += dA.sum(axis=0)
        dX[:, t] = dA @ Wx
        dh = dA @ Wh + (1.0 - m) * dh_t
        dc = dc_new * f + (1.0 - m) * dc_t
    return dX, dWx, dWh, db, dh, dc


# -- encoder ------------------------------------------------------------------

@dataclass
class EncoderOutput:
    """Per-step encoder states plus the decoder's initial state."""

    enc_states: Array  # [B,T,enc_out_dim]
    src_mask: Array    # [B,T]
    h0: Array          # [B,H]
    c0: Array          # [B,H]
    trace_fwd: _LstmTrace
    trace_bwd: _LstmTrace | None = None
    bridge_cache: tuple | None = None  # (cat_h, h0, cat_c, c0)


def encode_source(src_ids: Array, src_mask: Array, params: Parameters,
                  cfg: ModelConfig) -> EncoderOutput:
    """Embed and encode source rows; PAD steps carry state through.

    Unidirectional: decoder starts from the last non-PAD state.
    Bidirectional: per-step forward/backward states are concatenated and
    the decoder init is a learned tanh bridge from the two boundary
    states.
    """
    src_ids = np.atleast_2d(src_ids)
    src_mask = np.atleast_2d(src_mask).astype(np.float64)
    X = params["src_embedding"][src_ids]
    tr_fwd = _lstm_run(X, src_mask, params["enc_fwd_Wx"], params["enc_fwd_Wh"], params["enc_fwd_b"])
    if not cfg.bidirectional:
        return EncoderOutput(
            enc_states=tr_fwd.Hs,
            src_mask=src_mask,
            h0=tr_fwd.Hs[:, -1],
            c0=tr_fwd.Cs[:, -1],
            trace_fwd=tr_fwd,
        )
    # Backward direction: run the same machinery on time-flipped inputs.
    # Right padding lands first in flipped time, where carry-through
    # keeps the state at zero until real tokens start.
    tr_bwd = _lstm_run(
        X[:, ::-1], src_mask[:, ::-1],
        params["enc_bwd_Wx"], params["enc_bwd_Wh"], params["enc_bwd_b"],
    )
    enc_states = np.concatenate([tr_fwd.Hs, tr_bwd.Hs[:, ::-1]], axis=2)
    cat_h = np.concatenate([tr_fwd.Hs[:, -1], tr_bwd.Hs[:, -1]], axis=1)
    cat_c = np.concatenate([tr_fwd.Cs[:, -1], tr_bwd.Cs[:, -1]], axis=1)
    h0 = np.tanh(cat_h @ params["bridge_h_W"].T + params["bridge_h_b"])
    c0 = np.tanh(cat_c @ params["bridge_c_W"].T + params["bridge_c_b"])
    return EncoderOutput(
        enc_states=enc_states,
        src_mask=src_mask,
        h0=h0,
        c0=c0,
        trace_fwd=tr_fwd,
        trace_bwd=tr_bwd,
        bridge_cache=(cat_h, h0, cat_c, c0),
    )


# -- attention ----------------------------------------------------------------

def _attend_all(Hd: Array, enc_states: Array, src_mask: Array, W_a: Array):
    """Multiplicative attention of every decoder step over encoder states.

    Hd [B,Td,H], enc_states [B,Ts,He]; returns context [B,Td,He], alpha
    [B,Td,Ts] and the query tensor for backprop.
    """
    if np.any(src_mask.sum(axis=1) == 0):
        raise AllPadded("attention over a row with no non-PAD source steps")
    q = Hd @ W_a.T  # [B,Td,He]
    scores = np.einsum("bse,bte->bts", enc_states, q)
    scores = np.where(src_mask[:, None, :] > 0, scores, -np.inf)
    scores -= scores.max(axis=2, keepdims=True)
    ex = np.exp(scores)
    alpha = ex / ex.sum(axis=2, keepdims=True)
    context = np.einsum("bts,bse->bte", alpha, enc_states)
    return context, alpha, q


def attend(h_dec: Array, enc_states: Array, src_mask: Array, W_a: Array):
    """Context vector and attention weights for one decoder state.

    score_t = enc_state_t . (W_a h_dec) on non-PAD steps; alpha is their
    softmax and the context their alpha-weighted sum. Accepts a single
    [H] vector with [T,He] states, or batched [B,H] with [B,T,He].
    """
    single = h_dec.ndim == 1
    if single:
        h_dec = h_dec[None, :]
        enc_states = enc_states[None]
        src_mask = np.atleast_2d(src_mask)
    context, alpha, _ = _attend_all(h_dec[:, None, :], enc_states, src_mask, W_a)
    context, alpha = context[:, 0], alpha[:, 0]
    if single:
        return context[0], alpha[0]
    return context, alpha


def _attend_backward(dcontext, alpha, q, Hd, enc_states, W_a):
    """Gradients of _attend_all w.r.t. decoder states, encoder states, W_a."""
    dalpha = np.einsum("bte,bse->bts", dcontext, enc_states)
    denc = np.einsum("bts,bte->bse", alpha, dcontext)
    inner = (alpha * dalpha).sum(axis=2, keepdims=True)
    dscores = alpha * (dalpha - inner)  # zero wherever alpha is zero (PAD)
    dq = np.einsum("bts,bse->bte", dscores, enc_states)
    denc += np.einsum("bts,bte->bse", dscores, q)
    dW_a = np.einsum("bte,bth->eh", dq, Hd)
    dHd = dq @ W_a
    return dHd, denc, dW_a


# -- decoder ------------------------------------------------------------------

@dataclass
class _DecoderCache:
    trace: _LstmTrace
    features: Array           # post-dropout features fed to the projection
    drop_scale: Array | None  # recorded dropout mask / (1-p), or None
    alpha: Array | None
    q: Array | None
    context: Array | None


def _decode_teacher_forced(tgt_in_ids, tgt_mask, enc: EncoderOutput, params, cfg,
                           dropout_on=False, rng=None):
    Y = params["tgt_embedding"][tgt_in_ids]
    tr = _lstm_run(Y, tgt_mask, params["dec_Wx"], params["dec_Wh"], params["dec_b"],
                   h0=enc.h0, c0=enc.c0)
    if cfg.attention:
        context, alpha, q = _attend_all(tr.Hs, enc.enc_states, enc.src_mask, params["att_W"])
        features = np.concatenate([tr.Hs, context], axis=2)
    else:
        context = alpha = q = None
        features = tr.Hs
    drop_scale = None
    if dropout_on and cfg.dropout_rate > 0.0:
        if rng is None:
            raise ValueError("dropout_on requires an rng")
        keep = 1.0 - cfg.dropout_rate
        drop_scale = (rng.random(features.shape) < keep) / keep
        features = features * drop_scale
    logits = features @ params["out_W"].T + params["out_b"]
    return logits, _DecoderCache(tr, features, drop_scale, alpha, q, context)


def decode_train(tgt_in_ids: Array, tgt_mask: Array, enc: EncoderOutput,
                 params: Parameters, cfg: ModelConfig,
                 dropout_on: bool = False, rng: np.random.Generator | None = None) -> Array:
    """Teacher-forced logits [B,T,V]; dropout off is the exact identity."""
    tgt_in_ids = np.atleast_2d(tgt_in_ids)
    tgt_mask = np.atleast_2d(tgt_mask).astype(np.float64)
    logits, _ = _decode_teacher_forced(tgt_in_ids, tgt_mask, enc, params, cfg, dropout_on, rng)
    return logits


# -- loss ----------------------------------------------------------------------

def masked_cross_entropy(logits: Array, tgt_out: Array, tgt_mask: Array):
    """Mean NLL over non-PAD positions and its analytic logits gradient."""
    n = tgt_mask.sum()
    if n == 0:
        raise EmptyMask("cross entropy over a batch with no non-PAD targets")
    z = logits - logits.max(axis=-1, keepdims=True)
    lse = np.log(np.exp(z).sum(axis=-1, keepdims=True))
    logp = z - lse
    gold = np.take_along_axis(logp, tgt_out[..., None], axis=-1)[..., 0]
    loss = -(tgt_mask * gold).sum() / n
    dlogits = np.exp(logp)  # fresh C-contiguous array, safe to reshape in place
    flat = dlogits.reshape(-1, dlogits.shape[-1])
    flat[np.arange(flat.shape[0]), tgt_out.ravel()] -= 1.0
    dlogits *= (tgt_mask / n)[..., None]
    return loss, dlogits


# -- full forward/backward -----------------------------------------------------

def _check_finite(loss: float, grads: Gradients) -> None:
    if not math.isfinite(loss):
        raise NonFiniteDetected(f"non-finite loss {loss}")
    for name, g in grads.items():
        if not np.isfinite(g).all():
            raise NonFiniteDetected(f"non-finite gradient in {name}")


def backward(batch: EncodedBatch, params: Parameters, cfg: ModelConfig,
             rng: np.random.Generator | None = None,
             dropout_on: bool = False) -> tuple[float, Gradients]:
    """Loss and exact gradients of every parameter tensor for one batch."""
    enc = encode_source(batch.src_ids, batch.src_mask, params, cfg)
    logits, dec = _decode_teacher_forced(
        batch.tgt_in_ids, batch.tgt_mask, enc, params, cfg, dropout_on, rng
    )
    loss, dlogits = masked_cross_entropy(logits, batch.tgt_out_ids, batch.tgt_mask)

    grads = zero_gradients(params)
    H = cfg.hidden_dim

    # Output projection.
    grads["out_W"] += np.einsum("btv,btf->vf", dlogits, dec.features)
    grads["out_b"] += dlogits.sum(axis=(0, 1))
    dfeat = dlogits @ params["out_W"]
    if dec.drop_scale is not None:
        dfeat = dfeat * dec.drop_scale

    # Attention and the per-step gradients on decoder hidden states.
    denc_states = np.zeros_like(enc.enc_states)
    if cfg.attention:
        dh_direct = dfeat[:, :, :H]
        dcontext = dfeat[:, :, H:]
        dHd, denc_states_att, dW_a = _attend_backward(
            dcontext, dec.alpha, dec.q, dec.trace.Hs, enc.enc_states, params["att_W"]
        )
        denc_states += denc_states_att
        grads["att_W"] += dW_a
        dHs_dec = dh_direct + dHd
    else:
        dHs_dec = dfeat

    # Decoder recurrence.
    B = batch.src_ids.shape[0]
    zero = np.zeros((B, H))
    dY, dWx, dWh, db, dh0_dec, dc0_dec = _lstm_backward(
        dec.trace, params["dec_Wx"], params["dec_Wh"], dHs_dec, zero, zero
    )
    grads["dec_Wx"] += dWx
    grads["dec_Wh"] += dWh
    grads["dec_b"] += db
    np.add.at(
        grads["tgt_embedding"],
        np.atleast_2d(batch.tgt_in_ids).ravel(),
        dY.reshape(-1, cfg.embed_dim),
    )

    # Decoder init back into the encoder.
    if cfg.bidirectional:
        cat_h, h0, cat_c, c0 = enc.bridge_cache
        dpre_h = dh0_dec * (1.0 - h0 * h0)
        grads["bridge_h_W"] += dpre_h.T @ cat_h
        grads["bridge_h_b"] += dpre_h.sum(axis=0)
        dcat_h = dpre_h @ params["bridge_h_W"]
        dpre_c = dc0_dec * (1.0 - c0 * c0)
        grads["bridge_c_W"] += dpre_c.T @ cat_c
        grads["bridge_c_b"] += dpre_c.sum(axis=0)
        dcat_c = dpre_c @ params["bridge_c_W"]
        dh_last_fwd, dh_last_bwd = dcat_h[:, :H], dcat_h[:, H:]
        dc_last_fwd, dc_last_bwd = dcat_c[:, :H], dcat_c[:, H:]
        dHs_fwd = denc_states[:, :, :H]
        dHs_bwd = denc_states[:, :, H:][:, ::-1]  # to flipped time
    else:
        dh_last_fwd = dh0_dec
        dc_last_fwd = dc0_dec
        dHs_fwd = denc_states
        dHs_bwd = None

    dX, dWx, dWh, db, _, _ = _lstm_backward(
        enc.trace_fwd, params["enc_fwd_Wx"], params["enc_fwd_Wh"],
        dHs_fwd, dh_last_fwd, dc_last_fwd,
    )
    grads["enc_fwd_Wx"] += dWx
    grads["enc_fwd_Wh"] += dWh
    grads["enc_fwd_b"] += db
    if cfg.bidirectional:
        dXb, dWx, dWh, db, _, _ = _lstm_backward(
            enc.trace_bwd, params["enc_bwd_Wx"], params["enc_bwd_Wh"],
            dHs_bwd, dh_last_bwd, dc_last_bwd,
        )
        grads["enc_bwd_Wx"] += dWx
        grads["enc_bwd_Wh"] += dWh
        grads["enc_bwd_b"] += db
        dX += dXb[:, ::-1]  # back to original time
    np.add.at(
        grads["src_embedding"],
        np.atleast_2d(batch.src_ids).ravel(),
        dX.reshape(-1, cfg.embed_dim),
    )

    _check_finite(loss, grads)
    return loss, grads


# -- greedy decoding -------------------------------------------------------------

def greedy_decode(src_token_ids: Sequence[int], params: Parameters, cfg: ModelConfig) -> list[int]:
    """Greedy translation of one source row (token ids without specials).

    Feeds back the argmax token each step, stops at EOS or after
    max_decode_len tokens; the returned ids exclude BOS and EOS.
    """
    src = np.array([list(src_token_ids) + [EOS_ID]], dtype=np.int64)
    mask = np.ones_like(src, dtype=np.float64)
    enc = encode_source(src, mask, params, cfg)
    h, c = enc.h0, enc.c0
    weights = (params["dec_Wx"], params["dec_Wh"], params["dec_b"])
    token = BOS_ID
    out: list[int] = []
    for _ in range(cfg.max_decode_len):
        x = params["tgt_embedding"][np.array([token])]
        h, c = lstm_cell(x, h, c, weights)
        if cfg.attention:
            context, _ = attend(h, enc.enc_states, enc.src_mask, params["att_W"])
            features = np.concatenate([h, context], axis=1)
        else:
            features = h
        logits = features @ params["out_W"].T + params["out_b"]
        token = int(np.argmax(logits[0]))
        if token == EOS_ID:
            break
        out.append(token)
    return out


# -- checkpoint format ------------------------------------------------------------

def save_checkpoint(path: str | Path, params: Parameters, cfg: ModelConfig, seed: int) -> None:
    """Text manifest + raw little-endian float32 tensor data, row-major."""
    manifest = io.StringIO()
    manifest.write(f"format={CHECKPOINT_MAGIC}\n")
    manifest.write(f"version={CHECKPOINT_VERSION}\n")
    manifest.write(f"seed={seed}\n")
    for key in ("src_vocab_size", "tgt_vocab_size", "embed_dim", "hidden_dim",
                "bidirectional", "attention", "dropout_rate", "max_decode_len"):
        value = getattr(cfg, key)
        if isinstance(value, bool):
            value = int(value)
        manifest.write(f"config.{key}={value}\n")
    offset = 0
    blobs = []
    for name, tensor in params.items():
        data = np.ascontiguousarray(tensor, dtype="<f4").tobytes()
        shape = "x".join(str(d) for d in tensor.shape)
        manifest.write(f"tensor.{name}={shape}@{offset}\n")
        blobs.append(data)
        offset += len(data)
    try:
        with open(path, "wb") as fh:
            fh.write(manifest.getvalue().encode("utf-8"))
            fh.write(b"DATA\n")
            for blob in blobs:
                fh.write(blob)
    except OSError as exc:
        raise IoFailure(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path: str | Path) -> tuple[Parameters, ModelConfig, int]:
    """Read a checkpoint back; tensors come up as float64 for compute."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read checkpoint {path}: {exc}") from exc
    marker = raw.find(b"DATA\n")
    if marker < 0:
        raise IoFailure(f"{path} is not a checkpoint (missing DATA marker)")
    header = raw[:marker].decode("utf-8")
    data = raw[marker + 5 :]
    fields: dict[str, str] = {}
    tensor_specs: list[tuple[str, tuple[int, ...], int]] = []
    for line in header.splitlines():
        key, _, value = line.partition("=")
        if key.startswith("tensor."):
            shape_s, _, offset_s = value.partition("@")
            shape = tuple(int(d) for d in shape_s.split("x"))
            tensor_specs.append((key[len("tensor.") :], shape, int(offset_s)))
        else:
            fields[key] = value
    if fields.get("format") != CHECKPOINT_MAGIC:
        raise IoFailure(f"{path} has unknown format {fields.get('format')!r}")
    cfg = ModelConfig(
        src_vocab_size=int(fields["config.src_vocab_size"]),
        tgt_vocab_size=int(fields["config.tgt_vocab_size"]),
        embed_dim=int(fields["config.embed_dim"]),
        hidden_dim=int(fields["config.hidden_dim"]),
        bidirectional=bool(int(fields["config.bidirectional"])),
        attention=bool(int(fields["config.attention"])),
        dropout_rate=float(fields["config.dropout_rate"]),
        max_decode_len=int(fields["config.max_decode_len"]),
    )
    tensors = {}
    for name, shape, offset in tensor_specs:
        count = int(np.prod(shape))
        flat = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
        tensors[name] = flat.reshape(shape).astype(np.float64)
    expected = param_shapes(cfg)
    if set(tensors) != set(expected):
        raise IoFailure(f"{path} tensor names do not match its config")
    return Parameters(tensors), cfg, int(fields["seed"])

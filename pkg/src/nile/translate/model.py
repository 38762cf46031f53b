"""Encoder-decoder sequence model over numpy arrays.

Single-layer LSTM on each side, one embedding table shared by encoder
and decoder, and a linear projection from decoder states to vocabulary
logits.  The encoder's final (hidden, cell) pair is the thought vector
and seeds the decoder.  Training uses teacher forcing with masked
cross-entropy; inference decodes greedily from SOS.

Gate layout along the 4H axis is [input | forget | candidate | output].
Input projections for a whole sequence are computed as one matrix
product up front; only the hidden-to-hidden product runs per timestep.
Batches must have uniform input length (the trainer buckets by length),
while target sides are PAD-padded and masked, so trailing pad steps
contribute exactly zero loss and zero gradient.

All arithmetic stays in the dtype of the parameters: float32 for
training, float64 when checking gradients against finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .vocab import EOS, SOS, Vocabulary, index_tokens

MAX_DECODE_LEN = 128
GRAD_CLIP_NORM = 5.0

Params = dict[str, np.ndarray]

PARAM_KEYS = (
    "emb",
    "enc_Wx", "enc_Wh", "enc_b",
    "dec_Wx", "dec_Wh", "dec_b",
    "out_W", "out_b",
)


class MaxLengthExceeded(Exception):
    """Decoder never emitted EOS; carries the partial output."""

    def __init__(self, tokens: list[str]):
        self.tokens = tokens
        super().__init__(
            f"no end-of-sequence within {MAX_DECODE_LEN} steps; "
            f"partial output has {len(tokens)} tokens"
        )


@dataclass(frozen=True)
class TrainConfig:
    # learning_rate looks huge for SGD, but the loss is a mean over
    # tokens and the network is tiny; rates near 0.01 fail to memorize
    # even a single example within the default epoch budget.
    epochs: int = 70
    batch_size: int = 64
    validation_split: float = 0.20
    learning_rate: float = 5.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not 0.0 < self.validation_split < 1.0:
            raise ValueError("validation_split must be in (0, 1)")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")


@dataclass
class Seq2SeqModel:
    vocab: Vocabulary
    emb_dim: int
    hidden: int
    params: Params
    config: TrainConfig

    @property
    def dtype(self) -> np.dtype:
        return self.params["emb"].dtype


def init_params(
    vocab_size: int,
    emb_dim: int,
    hidden: int,
    seed: int,
    dtype: type = np.float32,
) -> Params:
    rng = np.random.default_rng(seed)

    def uniform(*shape: int) -> np.ndarray:
        return rng.uniform(-0.08, 0.08, size=shape).astype(dtype)

    params: Params = {
        "emb": uniform(vocab_size, emb_dim),
        "enc_Wx": uniform(emb_dim, 4 * hidden),
        "enc_Wh": uniform(hidden, 4 * hidden),
        "enc_b": np.zeros(4 * hidden, dtype=dtype),
        "dec_Wx": uniform(emb_dim, 4 * hidden),
        "dec_Wh": uniform(hidden, 4 * hidden),
        "dec_b": np.zeros(4 * hidden, dtype=dtype),
        "out_W": uniform(hidden, vocab_size),
        "out_b": np.zeros(vocab_size, dtype=dtype),
    }
    # Forget gates start open so state survives early training.
    params["enc_b"][hidden : 2 * hidden] = 1.0
    params["dec_b"][hidden : 2 * hidden] = 1.0
    return params


def _sigmoid(x: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-x))


@dataclass
class _LstmCache:
    x_emb: np.ndarray   # (B,T,E)
    gates: np.ndarray   # (B,T,4H) post-activation [i|f|g|o]
    tanh_c: np.ndarray  # (B,T,H)
    c_prev: np.ndarray  # (B,T,H)
    h_prev: np.ndarray  # (B,T,H)


def _lstm_forward(
    Wx: np.ndarray,
    Wh: np.ndarray,
    b: np.ndarray,
    x_emb: np.ndarray,
    h0: np.ndarray,
    c0: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, _LstmCache]:
    """Returns (all hidden states (B,T,H), final h, final c, cache)."""
    B, T, E = x_emb.shape
    H = Wh.shape[0]
    xp = (x_emb.reshape(B * T, E) @ Wx).reshape(B, T, 4 * H) + b

    dtype = x_emb.dtype
    Hs = np.empty((B, T, H), dtype=dtype)
    gates = np.empty((B, T, 4 * H), dtype=dtype)
    tanh_c = np.empty((B, T, H), dtype=dtype)
    c_prev = np.empty((B, T, H), dtype=dtype)
    h_prev = np.empty((B, T, H), dtype=dtype)

    h, c = h0, c0
    for t in range(T):
        z = xp[:, t] + h @ Wh
        i = _sigmoid(z[:, :H])
        f = _sigmoid(z[:, H : 2 * H])
        g = np.tanh(z[:, 2 * H : 3 * H])
        o = _sigmoid(z[:, 3 * H :])
        h_prev[:, t] = h
        c_prev[:, t] = c
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        gates[:, t, :H] = i
        gates[:, t, H : 2 * H] = f
        gates[:, t, 2 * H : 3 * H] = g
        gates[:, t, 3 * H :] = o
        tanh_c[:, t] = tc
        Hs[:, t] = h

    return Hs, h, c, _LstmCache(x_emb, gates, tanh_c, c_prev, h_prev)


def _lstm_backward(
    Wx: np.ndarray,
    Wh: np.ndarray,
    cache: _LstmCache,
    dHs: np.ndarray | None,
    dh_last: np.ndarray,
    dc_last: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Returns (dWx, dWh, db, dx_emb, dh0, dc0)."""
    B, T, E = cache.x_emb.shape
    H = Wh.shape[0]
    dZ = np.empty((B, T, 4 * H), dtype=cache.x_emb.dtype)

    dh_next = dh_last
    dc_next = dc_last
    for t in reversed(range(T)):
        dh = dh_next if dHs is None else dHs[:, t] + dh_next
        i = cache.gates[:, t, :H]
        f = cache.gates[:, t, H : 2 * H]
        g = cache.gates[:, t, 2 * H : 3 * H]
        o = cache.gates[:, t, 3 * H :]
        tc = cache.tanh_c[:, t]

        do = dh * tc
        dc = dc_next + dh * o * (1.0 - tc * tc)
        di = dc * g
        dg = dc * i
        df = dc * cache.c_prev[:, t]
        dc_next = dc * f

        dZ[:, t, :H] = di * i * (1.0 - i)
        dZ[:, t, H : 2 * H] = df * f * (1.0 - f)
        dZ[:, t, 2 * H : 3 * H] = dg * (1.0 - g * g)
        dZ[:, t, 3 * H :] = do * o * (1.0 - o)
        dh_next = dZ[:, t] @ Wh.T

    flat_dZ = dZ.reshape(B * T, 4 * H)
    dWx = cache.x_emb.reshape(B * T, E).T @ flat_dZ
    dWh = cache.h_prev.reshape(B * T, H).T @ flat_dZ
    db = flat_dZ.sum(axis=0)
    dx_emb = (flat_dZ @ Wx.T).reshape(B, T, E)
    return dWx, dWh, db, dx_emb, dh_next, dc_next


def _lstm_step(
    Wx: np.ndarray,
    Wh: np.ndarray,
    b: np.ndarray,
    x: np.ndarray,
    h: np.ndarray,
    c: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    H = Wh.shape[0]
    z = x @ Wx + h @ Wh + b
    i = _sigmoid(z[:, :H])
    f = _sigmoid(z[:, H : 2 * H])
    g = np.tanh(z[:, 2 * H : 3 * H])
    o = _sigmoid(z[:, 3 * H :])
    c = f * c + i * g
    return o * np.tanh(c), c


def batch_loss(
    params: Params,
    X: np.ndarray,
    Y_in: np.ndarray,
    Y_out: np.ndarray,
    mask: np.ndarray,
    want_grads: bool = True,
) -> tuple[float, Params | None]:
    """Masked mean cross-entropy per target token, optionally with grads.

    X (B,Tx) uniform-length input ids; Y_in (B,Ty) SOS-shifted targets;
    Y_out (B,Ty) targets ending in EOS then PAD; mask = Y_out != PAD.
    """
    emb = params["emb"]
    dtype = emb.dtype
    B = X.shape[0]
    H = params["enc_Wh"].shape[0]
    V = emb.shape[0]

    zeros = np.zeros((B, H), dtype=dtype)
    xe = emb[X]
    _, h_T, c_T, enc_cache = _lstm_forward(
        params["enc_Wx"], params["enc_Wh"], params["enc_b"], xe, zeros, zeros
    )
    ye = emb[Y_in]
    Hs, _, _, dec_cache = _lstm_forward(
        params["dec_Wx"], params["dec_Wh"], params["dec_b"], ye, h_T, c_T
    )

    Ty = Y_in.shape[1]
    logits = (Hs.reshape(B * Ty, H) @ params["out_W"]).reshape(B, Ty, V)
    logits += params["out_b"]
    zmax = logits.max(axis=-1, keepdims=True)
    lse = zmax + np.log(np.exp(logits - zmax).sum(axis=-1, keepdims=True))
    target_logit = np.take_along_axis(logits, Y_out[..., None], axis=-1)
    logp = (target_logit - lse)[..., 0]

    fmask = mask.astype(dtype)
    n_tok = fmask.sum()
    loss = float(-(logp * fmask).sum() / n_tok)
    if not want_grads:
        return loss, None

    dlogits = np.exp(logits - lse)
    bi = np.arange(B)[:, None]
    ti = np.arange(Ty)[None, :]
    dlogits[bi, ti, Y_out] -= 1.0
    dlogits *= (fmask / n_tok)[..., None]

    flat_dlogits = dlogits.reshape(B * Ty, V)
    dout_W = Hs.reshape(B * Ty, H).T @ flat_dlogits
    dout_b = flat_dlogits.sum(axis=0)
    dHs = (flat_dlogits @ params["out_W"].T).reshape(B, Ty, H)

    ddec_Wx, ddec_Wh, ddec_b, dye, dh0_dec, dc0_dec = _lstm_backward(
        params["dec_Wx"], params["dec_Wh"], dec_cache, dHs, zeros, zeros
    )
    denc_Wx, denc_Wh, denc_b, dxe, _, _ = _lstm_backward(
        params["enc_Wx"], params["enc_Wh"], enc_cache, None, dh0_dec, dc0_dec
    )

    demb = np.zeros_like(emb)
    np.add.at(demb, X, dxe)
    np.add.at(demb, Y_in, dye)

    grads: Params = {
        "emb": demb,
        "enc_Wx": denc_Wx, "enc_Wh": denc_Wh, "enc_b": denc_b,
        "dec_Wx": ddec_Wx, "dec_Wh": ddec_Wh, "dec_b": ddec_b,
        "out_W": dout_W, "out_b": dout_b,
    }
    return loss, grads


def clip_gradients(grads: Params, max_norm: float = GRAD_CLIP_NORM) -> float:
    """Scales grads in place to a global norm cap; returns the raw norm."""
    total = math.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


def _encode_ids(model: Seq2SeqModel, ids: list[int]) -> tuple[np.ndarray, np.ndarray]:
    p = model.params
    X = np.asarray([ids], dtype=np.int64)
    zeros = np.zeros((1, model.hidden), dtype=model.dtype)
    _, h, c, _ = _lstm_forward(
        p["enc_Wx"], p["enc_Wh"], p["enc_b"], p["emb"][X], zeros, zeros
    )
    return h, c


def thought_vector(model: Seq2SeqModel, tokens: list[str] | tuple[str, ...]) -> np.ndarray:
    """Concatenated final (hidden, cell) encoder state for one input."""
    if not tokens:
        raise ValueError("input must be non-empty")
    h, c = _encode_ids(model, index_tokens(list(tokens), model.vocab))
    return np.concatenate([h[0], c[0]])


def translate(
    model: Seq2SeqModel,
    tokens: list[str] | tuple[str, ...],
    max_len: int = MAX_DECODE_LEN,
) -> list[str]:
    """Greedy decode; returns output tokens without SOS/EOS."""
    if not tokens:
        raise ValueError("input must be non-empty")
    p = model.params
    h, c = _encode_ids(model, index_tokens(list(tokens), model.vocab))

    out: list[int] = []
    x = p["emb"][[SOS]]
    for _ in range(max_len):
        h, c = _lstm_step(p["dec_Wx"], p["dec_Wh"], p["dec_b"], x, h, c)
        logits = h @ p["out_W"] + p["out_b"]
        nxt = int(np.argmax(logits[0]))
        if nxt == EOS:
            return [model.vocab.words[i] for i in out]
        out.append(nxt)
        x = p["emb"][[nxt]]
    raise MaxLengthExceeded([model.vocab.words[i] for i in out])

"""Encoder/decoder network internals: gradients, masking, decoding."""

import math

import numpy as np
import pytest

from nile.translate.model import (
    GRAD_CLIP_NORM,
    PARAM_KEYS,
    MaxLengthExceeded,
    Seq2SeqModel,
    TrainConfig,
    batch_loss,
    clip_gradients,
    init_params,
    thought_vector,
    translate,
)
from nile.translate.vocab import EOS, PAD, SOS, Vocabulary, build_vocabulary

TINY_VOCAB = Vocabulary(
    ("<pad>", "<sos>", "<eos>", "<unk>", "w0", "w1", "w2", "w3", "w4", "w5")
)


def tiny_batch(rng, B=3, Tx=4, Ty=5, V=10):
    X = rng.integers(4, V, size=(B, Tx))
    targets = [list(rng.integers(4, V, size=rng.integers(2, Ty))) for _ in range(B)]
    Y_in = np.full((B, Ty), PAD, dtype=np.int64)
    Y_out = np.full((B, Ty), PAD, dtype=np.int64)
    for i, t in enumerate(targets):
        seq = t + [EOS]
        Y_in[i, : len(seq)] = [SOS] + t
        Y_out[i, : len(seq)] = seq
    mask = Y_out != PAD
    return X, Y_in, Y_out, mask


def test_gradient_check_against_finite_differences():
    rng = np.random.default_rng(7)
    V, E, H = 10, 4, 5
    params = init_params(V, E, H, seed=3, dtype=np.float64)
    X, Y_in, Y_out, mask = tiny_batch(rng, V=V)
    _, grads = batch_loss(params, X, Y_in, Y_out, mask)

    eps = 1e-5
    for key in PARAM_KEYS:
        p = params[key]
        g = grads[key]
        fd = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        while not it.finished:
            idx = it.multi_index
            orig = p[idx]
            p[idx] = orig + eps
            up, _ = batch_loss(params, X, Y_in, Y_out, mask, want_grads=False)
            p[idx] = orig - eps
            down, _ = batch_loss(params, X, Y_in, Y_out, mask, want_grads=False)
            p[idx] = orig
            fd[idx] = (up - down) / (2 * eps)
            it.iternext()
        num = np.linalg.norm(g - fd)
        den = max(np.linalg.norm(g), np.linalg.norm(fd), 1e-12)
        assert num / den <= 1e-4, f"{key}: relative error {num / den:.2e}"


def test_padding_does_not_change_loss():
    rng = np.random.default_rng(11)
    params = init_params(10, 4, 5, seed=3, dtype=np.float64)
    X, Y_in, Y_out, mask = tiny_batch(rng)
    base, _ = batch_loss(params, X, Y_in, Y_out, mask, want_grads=False)
    # widen the target tensors with pure padding columns
    padcol = np.full((X.shape[0], 2), PAD, dtype=np.int64)
    Y_in2 = np.concatenate([Y_in, padcol], axis=1)
    Y_out2 = np.concatenate([Y_out, padcol], axis=1)
    wide, _ = batch_loss(params, X, Y_in2, Y_out2, Y_out2 != PAD, want_grads=False)
    assert wide == pytest.approx(base, abs=1e-12)


def test_masked_positions_get_zero_gradient_from_targets():
    rng = np.random.default_rng(13)
    params = init_params(10, 4, 5, seed=4, dtype=np.float64)
    X, Y_in, Y_out, mask = tiny_batch(rng)
    _, g1 = batch_loss(params, X, Y_in, Y_out, mask)
    # scribbling on masked-out target ids must not affect gradients
    Y_scribbled = Y_out.copy()
    Y_scribbled[~mask] = 7
    _, g2 = batch_loss(params, X, Y_in, Y_scribbled, mask)
    for key in PARAM_KEYS:
        assert np.allclose(g1[key], g2[key], atol=1e-12)


def test_clip_rescales_large_gradients():
    g = {"a": np.full((3, 3), 10.0), "b": np.full((2,), -10.0)}
    raw = math.sqrt(sum(float((v * v).sum()) for v in g.values()))
    returned = clip_gradients(g, max_norm=GRAD_CLIP_NORM)
    assert returned == pytest.approx(raw)
    after = math.sqrt(sum(float((v * v).sum()) for v in g.values()))
    assert after == pytest.approx(GRAD_CLIP_NORM)


def test_clip_leaves_small_gradients_alone():
    g = {"a": np.array([0.3, -0.4])}
    returned = clip_gradients(g, max_norm=5.0)
    assert returned == pytest.approx(0.5)
    assert np.array_equal(g["a"], np.array([0.3, -0.4]))


def build_model(seed=1, E=8, H=6):
    v = build_vocabulary()
    params = init_params(len(v), E, H, seed=seed)
    return Seq2SeqModel(v, E, H, params, TrainConfig(seed=seed))


def test_translate_is_deterministic():
    model = build_model(seed=5)
    src = ["@middlebox", "@target"]
    try:
        first = translate(model, src)
        second = translate(model, src)
        assert first == second
    except MaxLengthExceeded:
        with pytest.raises(MaxLengthExceeded):
            translate(model, src)


def test_translate_never_emits_specials():
    model = build_model(seed=0)
    out = translate(model, ["@middlebox", "@target"], max_len=16)
    for tok in out:
        assert tok not in ("<pad>", "<sos>", "<eos>", "<unk>")


def test_untrained_model_overruns_decode_cap():
    model = build_model(seed=1)
    with pytest.raises(MaxLengthExceeded):
        translate(model, ["@middlebox", "@target"], max_len=3)


def test_thought_vector_is_state_sized_and_input_sensitive():
    model = build_model(seed=2, H=6)
    a = thought_vector(model, ["@middlebox", "@target"])
    b = thought_vector(model, ["@target", "@middlebox"])
    assert a.shape == (12,)
    assert not np.allclose(a, b)


def test_init_params_deterministic_per_seed():
    p1 = init_params(10, 4, 5, seed=9)
    p2 = init_params(10, 4, 5, seed=9)
    p3 = init_params(10, 4, 5, seed=10)
    for key in PARAM_KEYS:
        assert np.array_equal(p1[key], p2[key])
    assert any(not np.array_equal(p1[k], p3[k]) for k in PARAM_KEYS)


def test_loss_decreases_under_manual_sgd_steps():
    rng = np.random.default_rng(21)
    params = init_params(10, 4, 5, seed=6, dtype=np.float64)
    X, Y_in, Y_out, mask = tiny_batch(rng)
    first, _ = batch_loss(params, X, Y_in, Y_out, mask, want_grads=False)
    loss = first
    for _ in range(50):
        loss, grads = batch_loss(params, X, Y_in, Y_out, mask)
        clip_gradients(grads)
        for key in PARAM_KEYS:
            params[key] -= 0.5 * grads[key]
    assert loss < first

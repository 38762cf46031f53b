"""Weights container round-trip and format guards."""

import json

import numpy as np
import pytest

from nile.translate.model import PARAM_KEYS, Seq2SeqModel, TrainConfig, init_params
from nile.translate.store import (
    FORMAT_VERSION,
    ModelFormatError,
    load_model,
    save_model,
)
from nile.translate.vocab import build_vocabulary


def small_model(seed=4):
    vocab = build_vocabulary()
    params = init_params(len(vocab), 8, 6, seed=seed)
    return Seq2SeqModel(vocab, 8, 6, params, TrainConfig(epochs=3, seed=seed))


def test_round_trip_preserves_everything(tmp_path):
    model = small_model()
    path = tmp_path / "m.npz"
    save_model(path, model)
    loaded = load_model(path)
    assert loaded.emb_dim == model.emb_dim
    assert loaded.hidden == model.hidden
    assert loaded.vocab.words == model.vocab.words
    assert loaded.config == model.config
    for key in PARAM_KEYS:
        assert np.array_equal(loaded.params[key], model.params[key])
        assert loaded.params[key].dtype == model.params[key].dtype


def test_save_is_byte_reproducible(tmp_path):
    model = small_model()
    a, b = tmp_path / "a.npz", tmp_path / "b.npz"
    save_model(a, model)
    save_model(b, model)
    assert a.read_bytes() == b.read_bytes()


def test_loaded_params_are_independent_copies(tmp_path):
    model = small_model()
    path = tmp_path / "m.npz"
    save_model(path, model)
    first = load_model(path)
    second = load_model(path)
    first.params["emb"][:] = 0
    assert not np.array_equal(first.params["emb"], second.params["emb"])


def test_wrong_version_rejected(tmp_path):
    model = small_model()
    path = tmp_path / "m.npz"
    meta = {
        "format_version": FORMAT_VERSION + 1,
        "emb_dim": 8,
        "hidden": 6,
        "words": list(model.vocab.words),
        "config": {},
    }
    np.savez(path, __meta__=np.asarray(json.dumps(meta)), **model.params)
    with pytest.raises(ModelFormatError, match="format version"):
        load_model(path)


def test_missing_tensor_rejected(tmp_path):
    model = small_model()
    path = tmp_path / "m.npz"
    meta = {
        "format_version": FORMAT_VERSION,
        "emb_dim": 8,
        "hidden": 6,
        "words": list(model.vocab.words),
        "config": {"epochs": 3, "batch_size": 64, "validation_split": 0.2,
                   "learning_rate": 5.0, "seed": 4},
    }
    partial = {k: v for k, v in model.params.items() if k != "out_W"}
    np.savez(path, __meta__=np.asarray(json.dumps(meta)), **partial)
    with pytest.raises(ModelFormatError, match="out_W"):
        load_model(path)


def test_plain_npz_without_header_rejected(tmp_path):
    path = tmp_path / "m.npz"
    np.savez(path, emb=np.zeros((4, 4)))
    with pytest.raises(ModelFormatError, match="metadata"):
        load_model(path)

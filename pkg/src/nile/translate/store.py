"""Model weights container: one .npz holding tensors plus a JSON header."""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .model import PARAM_KEYS, Seq2SeqModel, TrainConfig
from .vocab import Vocabulary

FORMAT_VERSION = 1


class ModelFormatError(Exception):
    """File is not a model container this version can read."""


def save_model(path: str | Path, model: Seq2SeqModel) -> None:
    meta = {
        "format_version": FORMAT_VERSION,
        "emb_dim": model.emb_dim,
        "hidden": model.hidden,
        "words": list(model.vocab.words),
        "config": asdict(model.config),
    }
    np.savez(path, __meta__=np.asarray(json.dumps(meta)), **model.params)


def load_model(path: str | Path) -> Seq2SeqModel:
    with np.load(path, allow_pickle=False) as npz:
        if "__meta__" not in npz:
            raise ModelFormatError(f"{path}: missing metadata record")
        meta = json.loads(str(npz["__meta__"][()]))
        version = meta.get("format_version")
        if version != FORMAT_VERSION:
            raise ModelFormatError(
                f"{path}: format version {version!r}, expected {FORMAT_VERSION}"
            )
        missing = [k for k in PARAM_KEYS if k not in npz]
        if missing:
            raise ModelFormatError(f"{path}: missing tensors {missing}")
        params = {k: npz[k].copy() for k in PARAM_KEYS}
    return Seq2SeqModel(
        vocab=Vocabulary(tuple(meta["words"])),
        emb_dim=int(meta["emb_dim"]),
        hidden=int(meta["hidden"]),
        params=params,
        config=TrainConfig(**meta["config"]),
    )

"""Sequence-to-sequence translation of entity tokens into Nile tokens."""

from .dataset import TrainingExample, append_example, read_dataset, write_dataset
from .metrics import DegenerateExpected, r_squared
from .model import (
    GRAD_CLIP_NORM,
    MAX_DECODE_LEN,
    MaxLengthExceeded,
    Seq2SeqModel,
    TrainConfig,
    batch_loss,
    clip_gradients,
    init_params,
    thought_vector,
    translate,
)
from .store import ModelFormatError, load_model, save_model
from .train import (
    DEFAULT_EMB_DIM,
    DEFAULT_HIDDEN,
    DivergenceError,
    TrainingReport,
    dataset_loss,
    incorporate_feedback,
    train,
)
from .vocab import (
    EOS,
    INTENT_NAME_TOKEN,
    MAX_KIND_REPEATS,
    PAD,
    SOS,
    UNK,
    Vocabulary,
    build_vocabulary,
    entity_token,
    index_tokens,
    tokens_from_indices,
)

__all__ = [
    "DEFAULT_EMB_DIM",
    "DEFAULT_HIDDEN",
    "DegenerateExpected",
    "DivergenceError",
    "EOS",
    "GRAD_CLIP_NORM",
    "INTENT_NAME_TOKEN",
    "MAX_DECODE_LEN",
    "MAX_KIND_REPEATS",
    "MaxLengthExceeded",
    "ModelFormatError",
    "PAD",
    "SOS",
    "Seq2SeqModel",
    "TrainConfig",
    "TrainingExample",
    "TrainingReport",
    "UNK",
    "Vocabulary",
    "append_example",
    "batch_loss",
    "build_vocabulary",
    "clip_gradients",
    "dataset_loss",
    "entity_token",
    "incorporate_feedback",
    "index_tokens",
    "init_params",
    "load_model",
    "r_squared",
    "read_dataset",
    "save_model",
    "thought_vector",
    "tokens_from_indices",
    "train",
    "translate",
    "write_dataset",
]

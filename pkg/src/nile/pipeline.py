"""Refinement engine shared by the HTTP service and the chat REPL.

One utterance flows through extract -> anonymize -> translate ->
deanonymize and comes back as a :class:`Refinement` holding every
intermediate the feedback step later needs.  Confirming or correcting
a refinement turns it into a training example on the anonymous token
level, so the model never sees concrete names.

The engine keeps the model behind a lock and fine-tunes on a copy,
swapping the reference only after the epoch finishes.  Readers always
see either the old or the new weights, never a half-updated set.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

from .anonymize import AnonymizationMap, anonymize, deanonymize, reanonymize_tokens
from .entities import EntitySet
from .extract import Lexicon, default_lexicon, extract_entities
from .lang import NileIntent, parse_nile, render_nile, render_tokens, validate_intent
from .translate import (
    DegenerateExpected,
    MaxLengthExceeded,
    Seq2SeqModel,
    TrainingExample,
    dataset_loss,
    incorporate_feedback,
    r_squared,
    translate,
)

DEFAULT_INTENT_NAME = "testIntent"


@dataclass(frozen=True)
class Refinement:
    """Everything produced for one utterance, kept for the feedback step."""

    utterance: str
    entities: EntitySet
    amap: AnonymizationMap
    source_tokens: tuple[str, ...]  # anonymized entity sequence, model input
    output_tokens: tuple[str, ...]  # raw model output, still anonymous
    nile_text: str  # deanonymized program, canonically rendered when parseable
    warnings: tuple[str, ...]

    def parsed(self) -> NileIntent:
        return parse_nile(self.nile_text)


def _copied_model(model: Seq2SeqModel) -> Seq2SeqModel:
    params = {key: value.copy() for key, value in model.params.items()}
    return Seq2SeqModel(model.vocab, model.emb_dim, model.hidden, params, model.config)


def score_translation(model: Seq2SeqModel, example: TrainingExample) -> tuple[float, bool]:
    """(R², exact match) of the model on one anonymous pair.

    A decode that never terminates is scored on its partial output; a
    zero-variance expected side degenerates to the exact-match flag.
    """
    try:
        out = translate(model, example.entities)
    except MaxLengthExceeded as e:
        out = e.tokens
    exact = tuple(out) == example.nile
    try:
        r2 = r_squared(out, example.nile, model.vocab)
    except DegenerateExpected as d:
        r2 = 1.0 if d.exact_match else 0.0
    return r2, exact


def mean_r2(model: Seq2SeqModel, examples: list[TrainingExample]) -> float:
    if not examples:
        raise ValueError("cannot evaluate on an empty example list")
    return sum(score_translation(model, ex)[0] for ex in examples) / len(examples)


class RefinementEngine:
    """Model + lexicon + training data behind one thread-safe facade."""

    def __init__(
        self,
        model: Seq2SeqModel,
        dataset: list[TrainingExample],
        lexicon: Lexicon | None = None,
        intent_name: str = DEFAULT_INTENT_NAME,
    ):
        self._model = model
        self._dataset = list(dataset)
        self._lexicon = lexicon or default_lexicon()
        self.intent_name = intent_name
        self._lock = threading.Lock()
        self.feedback_count = 0
        self.last_train_loss: float | None = None
        self.mean_r2_last_eval: float | None = None

    @property
    def model(self) -> Seq2SeqModel:
        with self._lock:
            return self._model

    @property
    def dataset(self) -> list[TrainingExample]:
        with self._lock:
            return list(self._dataset)

    @property
    def dataset_size(self) -> int:
        with self._lock:
            return len(self._dataset)

    def refine(self, utterance: str) -> Refinement:
        """Translate one utterance into a candidate Nile program.

        Raises EmptyExtraction when the lexicon finds nothing,
        MaxLengthExceeded when decoding never terminates, and
        UnboundToken when the decoder emits a placeholder the
        anonymization map cannot ground.
        """
        entities = extract_entities(utterance, self._lexicon)
        source, amap = anonymize(entities)
        amap = amap.with_intent_name(self.intent_name)
        output = translate(self.model, source)
        text = deanonymize(" ".join(output), amap)

        warnings: list[str] = []
        try:
            intent = parse_nile(text)
        except Exception as err:  # undertrained model, surfaced not hidden
            warnings.append(f"candidate does not parse: {err}")
        else:
            text = render_nile(intent)
            report = validate_intent(intent)
            warnings.extend(p.message for p in report.problems)

        return Refinement(
            utterance=utterance,
            entities=entities,
            amap=amap,
            source_tokens=tuple(source),
            output_tokens=tuple(output),
            nile_text=text,
            warnings=tuple(warnings),
        )

    def feedback_example(
        self, refinement: Refinement, corrected_nile: str | None = None
    ) -> tuple[TrainingExample, str]:
        """Build the training pair for a confirm or a correction.

        Plain confirmation reuses the model's own output tokens.  A
        correction is parsed (ParseError propagates), re-rendered, and
        re-anonymized against the session's map so the stored pair
        stays on the placeholder level.  Returns (example, status)
        where status is "confirmed" or "corrected".
        """
        if corrected_nile is not None:
            intent = parse_nile(corrected_nile)
            tokens = reanonymize_tokens(render_tokens(intent), refinement.amap)
            if tuple(tokens) != refinement.output_tokens:
                return TrainingExample(refinement.source_tokens, tuple(tokens)), "corrected"
        return TrainingExample(refinement.source_tokens, refinement.output_tokens), "confirmed"

    def record_feedback(self, example: TrainingExample) -> None:
        """Grow the dataset without touching the weights."""
        with self._lock:
            self._dataset.append(example)
            self.feedback_count += 1

    def incorporate(self, example: TrainingExample) -> None:
        """Grow the dataset and fine-tune for one epoch on a copy of the
        weights; the visible model switches only when the epoch is done."""
        with self._lock:
            base = self._model
            grown_from = list(self._dataset)
        candidate = _copied_model(base)
        updated, grown = incorporate_feedback(candidate, grown_from, example)
        loss = dataset_loss(updated, grown)
        with self._lock:
            self._model = updated
            self._dataset = grown
            self.feedback_count += 1
            self.last_train_loss = loss

    def evaluate(self, examples: list[TrainingExample]) -> float:
        value = mean_r2(self.model, examples)
        if math.isfinite(value):
            self.mean_r2_last_eval = value
        return value

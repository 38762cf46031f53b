"""Fixed vocabulary over anonymized entity and Nile tokens.

Anonymization keeps the open-ended parts of the language (ids, values,
names) out of the token space, so the whole vocabulary is enumerable up
front: special indices, placeholder tokens for every entity kind up to
four repeats, the intent-name placeholder, the grammar's keywords, and
punctuation.  Both the encoder input and decoder output sides share it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..entities import EntityKind

PAD, SOS, EOS, UNK = 0, 1, 2, 3
SPECIALS = ("<pad>", "<sos>", "<eos>", "<unk>")

MAX_KIND_REPEATS = 4

INTENT_NAME_TOKEN = "@intent_name"

KEYWORDS = (
    "define", "intent", "from", "to", "for", "add", "with", "allow",
    "block", "start", "end", "endpoint", "middlebox", "client", "traffic",
    "flow", "latency", "jitter", "loss", "throughput", "hour", "date",
    "datetime", "none", "protocol", "src_port", "src_ip", "dest_port",
    "dest_ip", "less", "more", "or", "equal", "different",
)

PUNCTUATION = ("(", ")", "'", ",", ":")


def entity_token(kind: EntityKind, occurrence: int = 1) -> str:
    """Placeholder token for the occurrence-th entity of a kind (1-based)."""
    if not 1 <= occurrence <= MAX_KIND_REPEATS:
        raise ValueError(f"occurrence {occurrence} outside 1..{MAX_KIND_REPEATS}")
    base = f"@{kind.value}"
    return base if occurrence == 1 else f"{base}#{occurrence}"


def entity_tokens() -> tuple[str, ...]:
    return tuple(
        entity_token(kind, n)
        for kind in EntityKind
        for n in range(1, MAX_KIND_REPEATS + 1)
    )


@dataclass(frozen=True)
class Vocabulary:
    words: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.words[: len(SPECIALS)] != SPECIALS:
            raise ValueError("vocabulary must start with pad/sos/eos/unk")
        if len(set(self.words)) != len(self.words):
            raise ValueError("vocabulary words must be unique")
        if len(self.words) >= 256:
            raise ValueError("vocabulary too large")
        object.__setattr__(
            self, "index", {w: i for i, w in enumerate(self.words)}
        )

    def __len__(self) -> int:
        return len(self.words)

    def __contains__(self, word: str) -> bool:
        return word in self.index

    def word(self, idx: int) -> str:
        return self.words[idx]


def build_vocabulary() -> Vocabulary:
    """The standard vocabulary used across training, storage, and service."""
    return Vocabulary(
        SPECIALS + entity_tokens() + (INTENT_NAME_TOKEN,) + KEYWORDS + PUNCTUATION
    )


def index_tokens(seq: list[str] | tuple[str, ...], vocab: Vocabulary) -> list[int]:
    """Map tokens to indices; words outside the vocabulary become UNK."""
    return [vocab.index.get(tok, UNK) for tok in seq]


def tokens_from_indices(indices: list[int], vocab: Vocabulary) -> list[str]:
    return [vocab.words[i] for i in indices]

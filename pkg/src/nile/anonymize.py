"""Placeholder substitution between entity values and model tokens.

Extracted values are swapped for per-kind tokens (@middlebox,
@middlebox#2, ...) before translation, and swapped back afterwards.
The map is a bijection per utterance: one token per value and one value
per token, in entity order.  Repeats beyond the vocabulary's per-kind
cap are a pipeline error, not a silent truncation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .entities import EntityKind, EntitySet
from .translate.vocab import INTENT_NAME_TOKEN, MAX_KIND_REPEATS, entity_token

TOKEN_RE = re.compile(r"@[A-Za-z_][A-Za-z0-9_]*(?:#\d+)?")


class DuplicateValue(Exception):
    """Two entities carry the same value; tokens would not invert."""


class RepeatLimitExceeded(Exception):
    """More repeats of one kind than the vocabulary pre-registers."""


class UnboundToken(Exception):
    """Program mentions a token the map does not know (hallucination)."""

    def __init__(self, token: str):
        self.token = token
        super().__init__(f"token {token} is not bound to any extracted value")


@dataclass(frozen=True)
class AnonymizationMap:
    pairs: tuple[tuple[str, str], ...]  # (token, value), entity order
    token_to_value: dict[str, str] = field(init=False, repr=False, compare=False)
    value_to_token: dict[str, str] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        t2v = dict(self.pairs)
        v2t = {value: token for token, value in self.pairs}
        if len(t2v) != len(self.pairs) or len(v2t) != len(self.pairs):
            raise DuplicateValue("token/value pairs must be a bijection")
        object.__setattr__(self, "token_to_value", t2v)
        object.__setattr__(self, "value_to_token", v2t)

    def with_intent_name(self, name: str) -> "AnonymizationMap":
        """Binds the intent-name placeholder alongside the entity tokens."""
        if INTENT_NAME_TOKEN in self.token_to_value:
            return self
        return AnonymizationMap(self.pairs + ((INTENT_NAME_TOKEN, name),))


def anonymize(entities: EntitySet) -> tuple[list[str], AnonymizationMap]:
    """Tokens for each entity in order, plus the token → value map."""
    if not entities:
        raise ValueError("entity set must be non-empty")
    counts: dict[EntityKind, int] = {}
    pairs: list[tuple[str, str]] = []
    sequence: list[str] = []
    seen_values: set[str] = set()
    for entity in entities:
        if entity.value in seen_values:
            raise DuplicateValue(
                f"value {entity.value!r} appears more than once"
            )
        seen_values.add(entity.value)
        n = counts.get(entity.kind, 0) + 1
        if n > MAX_KIND_REPEATS:
            raise RepeatLimitExceeded(
                f"more than {MAX_KIND_REPEATS} entities of kind "
                f"{entity.kind.value}"
            )
        counts[entity.kind] = n
        token = entity_token(entity.kind, n)
        pairs.append((token, entity.value))
        sequence.append(token)
    return sequence, AnonymizationMap(tuple(pairs))


def deanonymize(program: str, amap: AnonymizationMap) -> str:
    """Substitutes every bound token; leftovers raise UnboundToken.

    Longer tokens are replaced first so @middlebox#2 is never clobbered
    by the @middlebox prefix.
    """
    for token in sorted(amap.token_to_value, key=len, reverse=True):
        program = program.replace(token, amap.token_to_value[token])
    leftover = TOKEN_RE.search(program)
    if leftover:
        raise UnboundToken(leftover.group(0))
    return program


def reanonymize_tokens(tokens: list[str], amap: AnonymizationMap) -> list[str]:
    """Inverse direction over a token list, for learning from corrections.

    Known values (possibly spanning several tokens, as multi-word ids
    do) collapse back to their placeholders; unknown words stay literal.
    """
    by_words = sorted(
        ((value.split(" "), token) for token, value in amap.token_to_value.items()),
        key=lambda item: len(item[0]),
        reverse=True,
    )
    out: list[str] = []
    i = 0
    while i < len(tokens):
        replaced = False
        for words, token in by_words:
            if tokens[i : i + len(words)] == words:
                out.append(token)
                i += len(words)
                replaced = True
                break
        if not replaced:
            out.append(tokens[i])
            i += 1
    return out

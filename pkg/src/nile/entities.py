"""Entity types shared by the extractor, anonymizer, and dataset generator."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class EntityKind(str, enum.Enum):
    """Closed set of network-entity categories an utterance can mention."""

    MIDDLEBOX = "middlebox"
    TARGET = "target"
    ORIGIN = "origin"
    DESTINATION = "destination"
    CLIENT = "client"
    METRIC = "metric"
    CONSTRAINT = "constraint"
    VALUE = "value"
    TRAFFIC = "traffic"
    RULE_ACTION = "rule_action"
    START_TIME = "start_time"
    END_TIME = "end_time"


@dataclass(frozen=True)
class Entity:
    """One extracted mention: category, canonical value, character offset.

    position refers to the start of the matched surface text in the
    utterance; synthesized entities (no surface text) carry the offset
    of the phrase that implied them.
    """

    kind: EntityKind
    value: str
    position: int

    def __post_init__(self) -> None:
        if not self.value:
            raise ValueError("entity value must be non-empty")
        if self.position < 0:
            raise ValueError("entity position must be non-negative")


@dataclass(frozen=True)
class EntitySet:
    """Entities of one utterance, ordered by position."""

    entities: tuple[Entity, ...]

    def __post_init__(self) -> None:
        positions = [e.position for e in self.entities]
        if positions != sorted(positions):
            raise ValueError("entities must be ordered by position")

    def __len__(self) -> int:
        return len(self.entities)

    def __iter__(self):
        return iter(self.entities)

    def __bool__(self) -> bool:
        return bool(self.entities)

"""Lexicon-driven entity extraction from natural-language utterances.

The matcher is deliberately deterministic: a synonym table resolves
known phrases (longest match first), small regexes catch values and
clock times, and a handful of context rules assign roles that depend on
surrounding words ("from X to Y" makes X the origin, "client B" names a
client, a value with no stated comparison gets a default one).  The
same (utterance, lexicon) always yields the same entities, ordered by
character position.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .entities import Entity, EntityKind, EntitySet

WORD_RE = re.compile(r"[0-9A-Za-z]+(?:[:.\-_][0-9A-Za-z]+)*")
TIME_RE = re.compile(r"^([01]?\d|2[0-3]):([0-5]\d)$")
VALUE_RE = re.compile(r"^(\d+(?:\.\d+)?)(ms|s|mbps|kbps|gbps|bps|%)$")
UNIT_RE = re.compile(r"^(ms|s|mbps|kbps|gbps|bps|%)$")
NUMBER_RE = re.compile(r"^\d+(?:\.\d+)?$")
CLIENT_ID_RE = re.compile(r"^[0-9A-Za-z_\-]+$")

# Words that can never be a client id ("for client to ..." captures nothing).
_CLIENT_STOPWORDS = frozenset(
    "a an and for from of or the to with only everyday".split()
)

# Ordering restrictions a value having no explicit comparison defaults to.
_DEFAULT_CONSTRAINT = {"throughput": "more or equal"}
_DEFAULT_CONSTRAINT_FALLBACK = "less or equal"


class EmptyExtraction(Exception):
    """No entity matched; the caller should re-prompt the operator."""

    def __init__(self, utterance: str):
        self.utterance = utterance
        super().__init__(f"no network entities recognized in {utterance!r}")


class LexiconError(Exception):
    """Malformed lexicon line."""


@dataclass(frozen=True)
class Lexicon:
    """Synonym table: lowercase surface phrase -> (kind, canonical value)."""

    entries: dict[tuple[str, ...], tuple[EntityKind, str]]
    max_words: int = field(init=False)
    target_canonicals: frozenset[str] = field(init=False)

    def __post_init__(self) -> None:
        if not self.entries:
            raise LexiconError("lexicon has no entries")
        object.__setattr__(
            self, "max_words", max(len(p) for p in self.entries)
        )
        object.__setattr__(
            self,
            "target_canonicals",
            frozenset(
                canonical
                for kind, canonical in self.entries.values()
                if kind is EntityKind.TARGET
            ),
        )

    @classmethod
    def from_lines(cls, lines) -> "Lexicon":
        entries: dict[tuple[str, ...], tuple[EntityKind, str]] = {}
        for lineno, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise LexiconError(
                    f"line {lineno}: expected phrase<TAB>kind<TAB>canonical"
                )
            phrase, kind_name, canonical = (p.strip() for p in parts)
            if not phrase or not canonical:
                raise LexiconError(f"line {lineno}: empty phrase or canonical")
            try:
                kind = EntityKind(kind_name)
            except ValueError:
                raise LexiconError(
                    f"line {lineno}: unknown kind {kind_name!r}"
                ) from None
            entries[tuple(phrase.lower().split())] = (kind, canonical)
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> "Lexicon":
        with open(path, encoding="utf-8") as fh:
            return cls.from_lines(fh)


_default_lexicon: Lexicon | None = None


def default_lexicon() -> Lexicon:
    global _default_lexicon
    if _default_lexicon is None:
        from importlib.resources import files

        text = files("nile").joinpath("data/lexicon.tsv").read_text("utf-8")
        _default_lexicon = Lexicon.from_lines(text.splitlines())
    return _default_lexicon


@dataclass
class _Word:
    text: str
    lower: str
    start: int


@dataclass
class _Mention:
    kind: EntityKind
    value: str
    position: int
    start_word: int
    end_word: int  # inclusive


def _words(utterance: str) -> list[_Word]:
    return [
        _Word(m.group(0), m.group(0).lower(), m.start())
        for m in WORD_RE.finditer(utterance)
    ]


def _scan_lexicon(words: list[_Word], lexicon: Lexicon) -> tuple[list[_Mention], set[int]]:
    mentions: list[_Mention] = []
    consumed: set[int] = set()
    i = 0
    while i < len(words):
        hit = None
        for n in range(min(lexicon.max_words, len(words) - i), 0, -1):
            phrase = tuple(w.lower for w in words[i : i + n])
            if phrase in lexicon.entries:
                kind, canonical = lexicon.entries[phrase]
                hit = _Mention(kind, canonical, words[i].start, i, i + n - 1)
                break
        if hit is None:
            i += 1
            continue
        mentions.append(hit)
        consumed.update(range(hit.start_word, hit.end_word + 1))
        i = hit.end_word + 1
    return mentions, consumed


def _scan_patterns(words: list[_Word], consumed: set[int]) -> list[_Mention]:
    mentions: list[_Mention] = []
    i = 0
    while i < len(words):
        if i in consumed:
            i += 1
            continue
        w = words[i]
        if TIME_RE.match(w.lower):
            hh, mm = w.lower.split(":")
            mentions.append(_Mention(
                EntityKind.START_TIME, f"{int(hh):02d}:{mm}", w.start, i, i
            ))
            consumed.add(i)
            i += 1
            continue
        if VALUE_RE.match(w.lower):
            mentions.append(_Mention(EntityKind.VALUE, w.lower, w.start, i, i))
            consumed.add(i)
            i += 1
            continue
        if (
            NUMBER_RE.match(w.lower)
            and i + 1 < len(words)
            and i + 1 not in consumed
            and UNIT_RE.match(words[i + 1].lower)
        ):
            mentions.append(_Mention(
                EntityKind.VALUE, w.lower + words[i + 1].lower, w.start, i, i + 1
            ))
            consumed.update((i, i + 1))
            i += 2
            continue
        if w.lower in ("client", "clients") and i + 1 < len(words):
            nxt = words[i + 1]
            if (
                i + 1 not in consumed
                and nxt.lower not in _CLIENT_STOPWORDS
                and CLIENT_ID_RE.match(nxt.text)
            ):
                mentions.append(_Mention(
                    EntityKind.CLIENT, nxt.text, nxt.start, i, i + 1
                ))
                consumed.update((i, i + 1))
                i += 2
                continue
        i += 1
    return mentions


def _resolve_locations(
    words: list[_Word], mentions: list[_Mention], lexicon: Lexicon
) -> None:
    by_start_word = {m.start_word: m for m in mentions}

    def target_after(word_idx: int, window: int = 3) -> _Mention | None:
        for j in range(word_idx, min(word_idx + window, len(words))):
            m = by_start_word.get(j)
            if m is not None and m.kind is EntityKind.TARGET:
                return m
        return None

    for i, w in enumerate(words):
        if w.lower != "from":
            continue
        first = target_after(i + 1)
        if first is None:
            continue
        j = first.end_word + 1
        if j >= len(words) or words[j].lower != "to":
            continue
        second = target_after(j + 1)
        if second is None:
            continue
        # "iperf client to server": a bare second name inherits the
        # first name's qualifier when the combination is known.
        if " " in first.value and " " not in second.value:
            qualified = f"{first.value.split(' ')[0]} {second.value}"
            if qualified in lexicon.target_canonicals:
                second.value = qualified
        first.kind = EntityKind.ORIGIN
        second.kind = EntityKind.DESTINATION


def _resolve_times(mentions: list[_Mention]) -> list[_Mention]:
    """First two clock times become the interval bounds; a lone time or
    any extra ones are dropped."""
    times = sorted(
        (m for m in mentions if m.kind is EntityKind.START_TIME),
        key=lambda m: m.position,
    )
    if len(times) < 2:
        drop = {id(t) for t in times}
    else:
        times[1].kind = EntityKind.END_TIME
        drop = {id(t) for t in times[2:]}
    return [m for m in mentions if id(m) not in drop]


def _synthesize_constraints(mentions: list[_Mention]) -> list[_Mention]:
    """A metric value without a stated comparison gets a default one,
    placed so the (metric, constraint, value) group keeps one of the two
    shapes the translator is trained on."""
    ordered = sorted(mentions, key=lambda m: m.position)
    extra: list[_Mention] = []
    for idx, m in enumerate(ordered):
        if m.kind is not EntityKind.VALUE:
            continue
        prev_m = ordered[idx - 1] if idx > 0 else None
        next_m = ordered[idx + 1] if idx + 1 < len(ordered) else None
        if (prev_m and prev_m.kind is EntityKind.CONSTRAINT) or (
            next_m and next_m.kind is EntityKind.CONSTRAINT
        ):
            continue
        metric = None
        for other in ordered:
            if other.kind is EntityKind.METRIC:
                if metric is None or abs(other.position - m.position) < abs(
                    metric.position - m.position
                ):
                    metric = other
        if metric is None:
            continue
        constraint = _DEFAULT_CONSTRAINT.get(
            metric.value, _DEFAULT_CONSTRAINT_FALLBACK
        )
        position = m.position - 1 if metric.position < m.position else m.position + 1
        extra.append(_Mention(
            EntityKind.CONSTRAINT, constraint, max(position, 0), m.start_word, m.end_word
        ))
    return mentions + extra


def extract_entities(utterance: str, lexicon: Lexicon | None = None) -> EntitySet:
    """All recognized entities of an utterance, ordered by position.

    Raises EmptyExtraction when nothing matches.
    """
    if not utterance or not utterance.strip():
        raise EmptyExtraction(utterance)
    lexicon = lexicon or default_lexicon()

    words = _words(utterance)
    mentions, consumed = _scan_lexicon(words, lexicon)
    mentions += _scan_patterns(words, consumed)
    _resolve_locations(words, mentions, lexicon)
    mentions = _resolve_times(mentions)
    mentions = _synthesize_constraints(mentions)

    mentions.sort(key=lambda m: m.position)
    seen: set[tuple[EntityKind, str]] = set()
    entities: list[Entity] = []
    for m in mentions:
        key = (m.kind, m.value)
        if key in seen:
            continue
        seen.add(key)
        entities.append(Entity(m.kind, m.value, m.position))
    if not entities:
        raise EmptyExtraction(utterance)
    return EntitySet(tuple(entities))

"""Typed AST for Nile intent programs.

All nodes are frozen dataclasses: structural equality is dataclass
equality, and instances are safe to share across threads.  Constructors
validate the invariants that the grammar alone cannot express (port
ranges, time formats, clause multiplicity), raising ValueError on
violation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

METRIC_IDS = ("latency", "jitter", "loss", "throughput")
CONSTRAINTS = ("less", "less or equal", "more", "more or equal", "equal", "different")
NO_CONSTRAINT = "none"
RULE_ACTIONS = ("allow", "block")
FIVE_TUPLE_KEYS = ("protocol", "src_port", "src_ip", "dest_port", "dest_ip")
DATETIME_KINDS = ("datetime", "date", "hour")

INTENT_NAME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_]*$")
HOUR_RE = re.compile(r"^([01]\d|2[0-3]):[0-5]\d$")
DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
DATETIME_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T([01]\d|2[0-3]):[0-5]\d$")


def _check_id(value: str, what: str) -> None:
    if not value:
        raise ValueError(f"{what} must be non-empty")
    if "'" in value:
        raise ValueError(f"{what} may not contain a quote: {value!r}")
    if value != value.strip() or "  " in value:
        raise ValueError(f"{what} may not have leading/trailing or doubled spaces: {value!r}")


@dataclass(frozen=True)
class MiddleboxRef:
    id: str

    def __post_init__(self):
        _check_id(self.id, "middlebox id")


@dataclass(frozen=True)
class EndpointRef:
    id: str

    def __post_init__(self):
        _check_id(self.id, "endpoint id")


@dataclass(frozen=True)
class NamedTraffic:
    traffic_id: str

    def __post_init__(self):
        _check_id(self.traffic_id, "traffic id")


@dataclass(frozen=True)
class FiveTupleField:
    key: str
    value: str

    def __post_init__(self):
        if self.key not in FIVE_TUPLE_KEYS:
            raise ValueError(f"unknown five-tuple key: {self.key!r}")
        _check_id(self.value, "five-tuple value")
        if self.key in ("src_port", "dest_port"):
            if not self.value.isdigit() or not 0 <= int(self.value) <= 65535:
                raise ValueError(f"port out of range: {self.value!r}")
        if self.key in ("src_ip", "dest_ip") and not _is_ipv4(self.value):
            raise ValueError(f"not a dotted-quad IPv4 address: {self.value!r}")


def _is_ipv4(value: str) -> bool:
    parts = value.split(".")
    return len(parts) == 4 and all(p.isdigit() and 0 <= int(p) <= 255 for p in parts)


@dataclass(frozen=True)
class FlowTraffic:
    fields: tuple[FiveTupleField, ...]

    def __post_init__(self):
        if not self.fields:
            raise ValueError("flow() must have at least one field")
        keys = [f.key for f in self.fields]
        if len(keys) != len(set(keys)):
            raise ValueError("flow() has a repeated five-tuple key")


TrafficSpec = Union[NamedTraffic, FlowTraffic]


@dataclass(frozen=True)
class Metric:
    metric_id: str
    constraint: str
    value: str | None = None

    def __post_init__(self):
        if self.metric_id not in METRIC_IDS:
            raise ValueError(f"unknown metric: {self.metric_id!r}")
        if self.constraint == NO_CONSTRAINT:
            if self.value is not None:
                raise ValueError("metric with 'none' constraint cannot carry a value")
        else:
            if self.constraint not in CONSTRAINTS:
                raise ValueError(f"unknown constraint: {self.constraint!r}")
            if not self.value:
                raise ValueError("constrained metric requires a value")
            _check_id(self.value, "metric value")


@dataclass(frozen=True)
class ClientTarget:
    client_id: str

    def __post_init__(self):
        _check_id(self.client_id, "client id")


Target = Union[ClientTarget, NamedTraffic, FlowTraffic]


@dataclass(frozen=True)
class DateTimeSpec:
    kind: str
    value: str

    _FORMATS = {"hour": HOUR_RE, "date": DATE_RE, "datetime": DATETIME_RE}

    def __post_init__(self):
        if self.kind not in DATETIME_KINDS:
            raise ValueError(f"unknown date/time kind: {self.kind!r}")
        if not self._FORMATS[self.kind].match(self.value):
            raise ValueError(f"malformed {self.kind} value: {self.value!r}")


@dataclass(frozen=True)
class Middleboxes:
    boxes: tuple[MiddleboxRef, ...]

    def __post_init__(self):
        if not self.boxes:
            raise ValueError("add clause requires at least one middlebox")


@dataclass(frozen=True)
class Qos:
    metrics: tuple[Metric, ...]

    def __post_init__(self):
        if not self.metrics:
            raise ValueError("with clause requires at least one metric")


@dataclass(frozen=True)
class Rule:
    action: str
    traffic: TrafficSpec

    def __post_init__(self):
        if self.action not in RULE_ACTIONS:
            raise ValueError(f"unknown rule action: {self.action!r}")


@dataclass(frozen=True)
class Targets:
    targets: tuple[Target, ...]

    def __post_init__(self):
        if not self.targets:
            raise ValueError("for clause requires at least one target")


@dataclass(frozen=True)
class Locations:
    origin: EndpointRef
    destination: EndpointRef


@dataclass(frozen=True)
class Interval:
    start: DateTimeSpec
    end: DateTimeSpec


Command = Union[Middleboxes, Qos, Rule, Targets, Locations, Interval]

# Canonical ordering of clauses in a rendered program.  Parsing sorts
# commands stably by this rank, so parse/render round-trips are exact.
CLAUSE_RANK = {Locations: 0, Targets: 1, Middleboxes: 2, Qos: 3, Rule: 4, Interval: 5}


@dataclass(frozen=True)
class NileIntent:
    name: str
    commands: tuple[Command, ...]

    def __post_init__(self):
        if not INTENT_NAME_RE.match(self.name):
            raise ValueError(f"bad intent name: {self.name!r}")
        if not self.commands:
            raise ValueError("intent requires at least one command")
        for cls in (Locations, Targets, Interval):
            if sum(isinstance(c, cls) for c in self.commands) > 1:
                raise ValueError(f"at most one {cls.__name__} clause per intent")

    def clauses(self, cls) -> list:
        return [c for c in self.commands if isinstance(c, cls)]

    def middlebox_ids(self) -> list[str]:
        return [b.id for c in self.clauses(Middleboxes) for b in c.boxes]

    def locations(self) -> Locations | None:
        found = self.clauses(Locations)
        return found[0] if found else None

    def interval(self) -> Interval | None:
        found = self.clauses(Interval)
        return found[0] if found else None


def canonical_command_order(commands) -> tuple[Command, ...]:
    """Stable-sort commands into the canonical clause order."""
    return tuple(sorted(commands, key=lambda c: CLAUSE_RANK[type(c)]))

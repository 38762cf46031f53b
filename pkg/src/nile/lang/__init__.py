"""Nile intent language: AST, parser, renderer, validator."""

from .ast import (
    CLAUSE_RANK,
    CONSTRAINTS,
    DATETIME_KINDS,
    FIVE_TUPLE_KEYS,
    METRIC_IDS,
    NO_CONSTRAINT,
    RULE_ACTIONS,
    ClientTarget,
    Command,
    DateTimeSpec,
    EndpointRef,
    FiveTupleField,
    FlowTraffic,
    Interval,
    Locations,
    Metric,
    Middleboxes,
    MiddleboxRef,
    NamedTraffic,
    NileIntent,
    Qos,
    Rule,
    Target,
    Targets,
    TrafficSpec,
    canonical_command_order,
)
from .parser import ParseError, parse_nile, tokenize
from .render import detokenize, render_nile, render_tokens
from .validate import Problem, ValidationReport, validate_intent

__all__ = [
    "CLAUSE_RANK",
    "CONSTRAINTS",
    "DATETIME_KINDS",
    "FIVE_TUPLE_KEYS",
    "METRIC_IDS",
    "NO_CONSTRAINT",
    "RULE_ACTIONS",
    "ClientTarget",
    "Command",
    "DateTimeSpec",
    "EndpointRef",
    "FiveTupleField",
    "FlowTraffic",
    "Interval",
    "Locations",
    "Metric",
    "Middleboxes",
    "MiddleboxRef",
    "NamedTraffic",
    "NileIntent",
    "ParseError",
    "Problem",
    "Qos",
    "Rule",
    "Target",
    "Targets",
    "TrafficSpec",
    "ValidationReport",
    "canonical_command_order",
    "detokenize",
    "parse_nile",
    "render_nile",
    "render_tokens",
    "tokenize",
    "validate_intent",
]

"""Canonical rendering of Nile intents.

Two surface forms share one structure walk:

* render_nile: human-readable text, commands in canonical clause order,
  two-space indentation, one list item per line.  This is the fixed
  point of parse_nile and the golden-file format used across the repo.
* render_tokens: flat token sequence for the translation model.  Quote
  marks become standalone tokens and quoted ids are split on spaces, so
  detokenize (which re-joins with single spaces) is lossless for the
  ids the language admits (no leading/trailing/doubled spaces).
"""

from __future__ import annotations

from .ast import (
    ClientTarget,
    Command,
    DateTimeSpec,
    FlowTraffic,
    Interval,
    Locations,
    Metric,
    Middleboxes,
    NamedTraffic,
    NileIntent,
    NO_CONSTRAINT,
    Qos,
    Rule,
    Targets,
    TrafficSpec,
    canonical_command_order,
)

_INDENT = "  "


def _traffic(t: TrafficSpec) -> str:
    if isinstance(t, NamedTraffic):
        return f"traffic('{t.traffic_id}')"
    fields = ", ".join(f"{f.key}:'{f.value}'" for f in t.fields)
    return f"flow({fields})"


def _metric(m: Metric) -> str:
    if m.constraint == NO_CONSTRAINT:
        return f"{m.metric_id}(none)"
    return f"{m.metric_id}('{m.constraint}', '{m.value}')"


def _datetime(d: DateTimeSpec) -> str:
    return f"{d.kind}('{d.value}')"


def _keyword_list(keyword: str, items: list[str]) -> list[str]:
    # Break after each comma; continuation lines align under the first
    # item, e.g.  "  add middlebox('firewall'),\n      middlebox('ids')".
    cont = _INDENT + " " * (len(keyword) + 1)
    lines = []
    for i, item in enumerate(items):
        prefix = f"{_INDENT}{keyword} " if i == 0 else cont
        suffix = "," if i < len(items) - 1 else ""
        lines.append(prefix + item + suffix)
    return lines


def _command_lines(cmd: Command) -> list[str]:
    if isinstance(cmd, Locations):
        return [
            f"{_INDENT}from endpoint('{cmd.origin.id}')",
            f"{_INDENT}to endpoint('{cmd.destination.id}')",
        ]
    if isinstance(cmd, Targets):
        items = [
            f"client('{t.client_id}')" if isinstance(t, ClientTarget) else _traffic(t)
            for t in cmd.targets
        ]
        return _keyword_list("for", items)
    if isinstance(cmd, Middleboxes):
        return _keyword_list("add", [f"middlebox('{b.id}')" for b in cmd.boxes])
    if isinstance(cmd, Qos):
        return _keyword_list("with", [_metric(m) for m in cmd.metrics])
    if isinstance(cmd, Rule):
        return [f"{_INDENT}{cmd.action} {_traffic(cmd.traffic)}"]
    if isinstance(cmd, Interval):
        return [
            f"{_INDENT}start {_datetime(cmd.start)}",
            f"{_INDENT}end {_datetime(cmd.end)}",
        ]
    raise TypeError(f"not a command: {cmd!r}")


def render_nile(intent: NileIntent) -> str:
    """Canonical multi-line text of an intent."""
    lines = [f"define intent {intent.name}:"]
    for cmd in canonical_command_order(intent.commands):
        lines.extend(_command_lines(cmd))
    return "\n".join(lines)


def render_tokens(intent: NileIntent) -> list[str]:
    """Intent as a flat token list (model target form).

    Produced by lexing the canonical text and exploding quoted ids into
    quote-mark tokens plus one token per word.
    """
    from .parser import QUOTED, EOF, tokenize

    out: list[str] = []
    for tok in tokenize(render_nile(intent)):
        if tok.kind == EOF:
            continue
        if tok.kind == QUOTED:
            out.append("'")
            out.extend(tok.value.split(" "))
            out.append("'")
        else:
            out.append(tok.value)
    return out


def detokenize(tokens: list[str]) -> str:
    """Inverse presentation of render_tokens: space-join the tokens.

    The result parses identically to the canonical text because the
    lexer treats whitespace uniformly.
    """
    return " ".join(tokens)

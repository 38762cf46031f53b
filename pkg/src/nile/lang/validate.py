"""Semantic checks beyond what the grammar can express.

The parser accepts any derivable program; validate_intent reports
contradictions and redundancies an operator would want surfaced before
confirming.  Problems are collected, not raised, so a UI can show all
of them at once.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import Interval, Middleboxes, NileIntent, Qos, Rule


@dataclass(frozen=True)
class Problem:
    code: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple[Problem, ...]

    @property
    def ok(self) -> bool:
        return not self.problems


def validate_intent(intent: NileIntent) -> ValidationReport:
    problems: list[Problem] = []

    for qos in intent.clauses(Qos):
        seen: set[str] = set()
        for m in qos.metrics:
            if m.metric_id in seen:
                problems.append(Problem(
                    "duplicate-metric",
                    f"metric '{m.metric_id}' constrained twice in one qos clause",
                ))
            seen.add(m.metric_id)

    seen_boxes: set[str] = set()
    for mb in intent.clauses(Middleboxes):
        for box in mb.boxes:
            if box.id in seen_boxes:
                problems.append(Problem(
                    "duplicate-middlebox",
                    f"middlebox '{box.id}' added more than once",
                ))
            seen_boxes.add(box.id)

    by_traffic: dict[object, set[str]] = {}
    for rule in intent.clauses(Rule):
        by_traffic.setdefault(rule.traffic, set()).add(rule.action)
    for traffic, actions in by_traffic.items():
        if len(actions) > 1:
            problems.append(Problem(
                "contradictory-rules",
                f"traffic {traffic!r} is both allowed and blocked",
            ))

    interval = intent.interval()
    if interval is not None:
        problems.extend(_check_interval(interval))

    return ValidationReport(tuple(problems))


def _check_interval(interval: Interval) -> list[Problem]:
    start, end = interval.start, interval.end
    if start.kind != end.kind:
        # 'start date(...) end datetime(...)' is well-formed but the
        # bounds are not comparable; leave that to the operator.
        return []
    if start.value >= end.value:
        # Lexicographic compare is chronological for all three formats.
        # A same-kind wraparound like 18:00..09:00 could mean "overnight"
        # but the grammar gives no way to say so; flag it.
        return [Problem(
            "empty-interval",
            f"interval start {start.value!r} is not before end {end.value!r}",
        )]
    return []

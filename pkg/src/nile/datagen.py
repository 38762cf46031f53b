"""Random generator of anonymized (entity sequence, Nile program) pairs.

Each example is built from a random subset of features (middleboxes,
locations, targets, qos, rules, interval).  The entity side lists the
features' placeholder tokens in a random feature order, imitating the
free order of spoken intents; the Nile side is the canonical program
over the same tokens.  Placeholder suffixes (#2..) number repeated
kinds by entity position, so both sides stay consistent.

The construction keeps entity-sequence → program a function: tokens of
one feature stay contiguous, a rule's action token immediately precedes
its traffic, qos groups use one of two fixed internal orders, and time
tokens for non-hour intervals carry a leading format marker.  A test
over many samples checks the property empirically.

Concrete values only matter for end-to-end checks; substitute_dummies
fills placeholders from small fixture pools, format-aware so the result
always parses.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .entities import EntityKind
from .lang.ast import CONSTRAINTS, FIVE_TUPLE_KEYS, METRIC_IDS
from .translate.dataset import TrainingExample
from .translate.vocab import INTENT_NAME_TOKEN, entity_token

FEATURES = ("middleboxes", "locations", "targets", "qos", "rules", "interval")

P_TWO_METRICS = 0.35
P_NONE_METRIC = 0.10
P_VALUE_FIRST = 0.20
P_TWO_CLIENTS = 0.25
P_CLIENT_TARGET = 0.60
INTERVAL_KIND_P = {"hour": 0.6, "date": 0.2, "datetime": 0.2}

MIDDLEBOX_POOL = ("firewall", "ids", "dpi", "proxy", "cache", "nat")
ENDPOINT_POOL = ("gateway", "database", "backend", "dmz", "server01", "storage")
CLIENT_POOL = ("A", "B", "C", "guests")
TRAFFIC_POOL = ("https", "streaming", "torrent", "dns", "smtp", "voip")
QOS_VALUE_POOL = ("10ms", "5ms", "100mbps", "1gbps", "300kbps", "2s")
HOUR_POOL = ("08:00", "09:00", "12:30", "18:00", "23:15")
DATE_POOL = ("2026-01-05", "2026-03-14", "2026-08-20", "2026-12-24")
DATETIME_POOL = (
    "2026-01-05T08:00", "2026-03-14T09:30", "2026-08-20T18:00", "2026-12-24T23:15",
)
NAME_POOL = ("testIntent", "qosIntent", "appIntent", "mediaIntent")
PROTOCOL_POOL = ("tcp", "udp", "icmp")
PORT_POOL = ("22", "53", "443", "8080")
IP_POOL = ("10.0.0.5", "10.1.2.3", "172.16.0.2", "192.168.1.10")


@dataclass(frozen=True)
class GenSpec:
    size: int
    seed: int = 0
    middleboxes: float = 0.5
    locations: float = 0.5
    targets: float = 0.5
    qos: float = 0.5
    rules: float = 0.5
    interval: float = 0.5
    flow: float = 0.0  # share of targets/rules phrased as five-tuple flows

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError("size must be >= 1")
        weights = [getattr(self, f) for f in FEATURES] + [self.flow]
        if any(not 0.0 <= w <= 1.0 for w in weights):
            raise ValueError("feature weights must be in [0, 1]")
        if all(getattr(self, f) == 0.0 for f in FEATURES):
            raise ValueError("at least one feature weight must be positive")


class _TokenAssigner:
    def __init__(self) -> None:
        self.counts: dict[EntityKind, int] = {}

    def take(self, kind: EntityKind) -> str:
        n = self.counts.get(kind, 0) + 1
        self.counts[kind] = n
        return entity_token(kind, n)


def _quoted(token: str) -> list[str]:
    return ["(", "'", token, "'", ")"]


def _flow_keys(rng: np.random.Generator) -> list[str]:
    n = 2 if rng.random() < 0.4 else 1
    picks = rng.choice(len(FIVE_TUPLE_KEYS), size=n, replace=False)
    return [FIVE_TUPLE_KEYS[i] for i in sorted(int(p) for p in picks)]


def _one_example(rng: np.random.Generator, spec: GenSpec) -> TrainingExample:
    present = [f for f in FEATURES if rng.random() < getattr(spec, f)]
    if not present:
        weights = np.array([getattr(spec, f) for f in FEATURES], dtype=float)
        pick = int(rng.choice(len(FEATURES), p=weights / weights.sum()))
        present = [FEATURES[pick]]

    # Structure decisions, drawn in a fixed order for reproducibility.
    n_mb = int(rng.integers(1, 4)) if "middleboxes" in present else 0
    target_mode: tuple = ()
    if "targets" in present:
        if rng.random() < spec.flow:
            target_mode = ("flow", _flow_keys(rng))
        elif rng.random() < P_CLIENT_TARGET:
            target_mode = ("clients", 2 if rng.random() < P_TWO_CLIENTS else 1)
        elif rng.random() < 0.5:
            target_mode = ("traffic",)
        else:
            # A bare named target ("the backend") becomes the policy's
            # client id, the grammar's only id-bearing target form.
            target_mode = ("plain",)
    qos_shapes: list[tuple] = []
    if "qos" in present:
        n_groups = 2 if rng.random() < P_TWO_METRICS else 1
        for _ in range(n_groups):
            if rng.random() < P_NONE_METRIC:
                qos_shapes.append(("none",))
            elif rng.random() < P_VALUE_FIRST:
                qos_shapes.append(("value_first",))
            else:
                qos_shapes.append(("standard",))
    rule_mode: tuple = ()
    if "rules" in present:
        # One flow construct per intent keeps @value repeats within cap.
        if rng.random() < spec.flow and target_mode[:1] != ("flow",):
            rule_mode = ("flow", _flow_keys(rng))
        else:
            rule_mode = ("traffic",)
    interval_kind = ""
    if "interval" in present:
        kinds = list(INTERVAL_KIND_P)
        probs = list(INTERVAL_KIND_P.values())
        interval_kind = kinds[int(rng.choice(len(kinds), p=probs))]

    order = [present[int(i)] for i in rng.permutation(len(present))]

    # Flatten in utterance order, assigning suffixes by position.
    take = _TokenAssigner().take
    entities: list[str] = []
    mb_tokens: list[str] = []
    origin_tok = dest_tok = ""
    client_tokens: list[str] = []
    target_traffic_tok = ""
    target_plain_tok = ""
    target_flow: list[tuple[str, str]] = []
    qos_groups: list[tuple[str, str | None, str | None]] = []
    rule_action_tok = rule_traffic_tok = ""
    rule_flow: list[tuple[str, str]] = []
    start_tok = end_tok = ""

    for feat in order:
        if feat == "middleboxes":
            mb_tokens = [take(EntityKind.MIDDLEBOX) for _ in range(n_mb)]
            entities.extend(mb_tokens)
        elif feat == "locations":
            origin_tok = take(EntityKind.ORIGIN)
            dest_tok = take(EntityKind.DESTINATION)
            entities.extend([origin_tok, dest_tok])
        elif feat == "targets":
            if target_mode[0] == "clients":
                client_tokens = [take(EntityKind.CLIENT) for _ in range(target_mode[1])]
                entities.extend(client_tokens)
            elif target_mode[0] == "traffic":
                target_traffic_tok = take(EntityKind.TRAFFIC)
                entities.append(target_traffic_tok)
            elif target_mode[0] == "plain":
                target_plain_tok = take(EntityKind.TARGET)
                entities.append(target_plain_tok)
            else:
                entities.append("flow")
                for key in target_mode[1]:
                    tok = take(EntityKind.VALUE)
                    target_flow.append((key, tok))
                    entities.extend([key, tok])
        elif feat == "qos":
            for shape in qos_shapes:
                if shape[0] == "none":
                    m = take(EntityKind.METRIC)
                    qos_groups.append((m, None, None))
                    entities.append(m)
                elif shape[0] == "value_first":
                    v = take(EntityKind.VALUE)
                    c = take(EntityKind.CONSTRAINT)
                    m = take(EntityKind.METRIC)
                    qos_groups.append((m, c, v))
                    entities.extend([v, c, m])
                else:
                    m = take(EntityKind.METRIC)
                    c = take(EntityKind.CONSTRAINT)
                    v = take(EntityKind.VALUE)
                    qos_groups.append((m, c, v))
                    entities.extend([m, c, v])
        elif feat == "rules":
            rule_action_tok = take(EntityKind.RULE_ACTION)
            entities.append(rule_action_tok)
            if rule_mode[0] == "traffic":
                rule_traffic_tok = take(EntityKind.TRAFFIC)
                entities.append(rule_traffic_tok)
            else:
                entities.append("flow")
                for key in rule_mode[1]:
                    tok = take(EntityKind.VALUE)
                    rule_flow.append((key, tok))
                    entities.extend([key, tok])
        elif feat == "interval":
            start_tok = take(EntityKind.START_TIME)
            end_tok = take(EntityKind.END_TIME)
            if interval_kind == "hour":
                entities.extend([start_tok, end_tok])
            else:
                entities.extend([interval_kind, start_tok, interval_kind, end_tok])

    # Program side, clauses in canonical order over the same tokens.
    def flow_tokens(fields: list[tuple[str, str]]) -> list[str]:
        out = ["flow", "("]
        for j, (key, tok) in enumerate(fields):
            if j:
                out.append(",")
            out.extend([key, ":", "'", tok, "'"])
        out.append(")")
        return out

    nile = ["define", "intent", INTENT_NAME_TOKEN, ":"]
    if "locations" in present:
        nile += ["from", "endpoint", *_quoted(origin_tok)]
        nile += ["to", "endpoint", *_quoted(dest_tok)]
    if "targets" in present:
        nile.append("for")
        if target_mode[0] == "clients":
            for j, tok in enumerate(client_tokens):
                if j:
                    nile.append(",")
                nile += ["client", *_quoted(tok)]
        elif target_mode[0] == "traffic":
            nile += ["traffic", *_quoted(target_traffic_tok)]
        elif target_mode[0] == "plain":
            nile += ["client", *_quoted(target_plain_tok)]
        else:
            nile += flow_tokens(target_flow)
    if "middleboxes" in present:
        nile.append("add")
        for j, tok in enumerate(mb_tokens):
            if j:
                nile.append(",")
            nile += ["middlebox", *_quoted(tok)]
    if "qos" in present:
        nile.append("with")
        for j, (m, c, v) in enumerate(qos_groups):
            if j:
                nile.append(",")
            if c is None:
                nile += [m, "(", "none", ")"]
            else:
                nile += [m, "(", "'", c, "'", ",", "'", v, "'", ")"]
    if "rules" in present:
        nile.append(rule_action_tok)
        if rule_mode[0] == "traffic":
            nile += ["traffic", *_quoted(rule_traffic_tok)]
        else:
            nile += flow_tokens(rule_flow)
    if "interval" in present:
        nile += ["start", interval_kind, *_quoted(start_tok)]
        nile += ["end", interval_kind, *_quoted(end_tok)]

    return TrainingExample(tuple(entities), tuple(nile))


def generate(spec: GenSpec) -> list[TrainingExample]:
    """spec.size pairs, byte-stable under spec.seed (per-item substreams)."""
    return [
        _one_example(np.random.default_rng([spec.seed, i]), spec)
        for i in range(spec.size)
    ]


def split_test(
    dataset: list[TrainingExample], fraction: float = 0.20, seed: int = 0
) -> tuple[list[TrainingExample], list[TrainingExample]]:
    """Disjoint (train, test) with |test| = round(fraction * n), capped so
    the training side is never empty."""
    if not 0.0 < fraction < 1.0:
        raise ValueError("fraction must be in (0, 1)")
    n = len(dataset)
    n_test = min(round(fraction * n), n - 1)
    order = np.random.default_rng(seed).permutation(n)
    test_idx = {int(i) for i in order[:n_test]}
    train = [ex for i, ex in enumerate(dataset) if i not in test_idx]
    test = [ex for i, ex in enumerate(dataset) if i in test_idx]
    return train, test


def _pool_for(base: str) -> tuple[str, ...]:
    return {
        "@intent_name": NAME_POOL,
        "@middlebox": MIDDLEBOX_POOL,
        "@origin": ENDPOINT_POOL,
        "@destination": ENDPOINT_POOL,
        "@target": ENDPOINT_POOL,
        "@client": CLIENT_POOL,
        "@traffic": TRAFFIC_POOL,
        "@metric": METRIC_IDS,
        "@constraint": CONSTRAINTS,
        "@rule_action": ("allow", "block"),
        "@value": QOS_VALUE_POOL,
    }[base]


def dummy_mapping(example: TrainingExample, seed: int = 0) -> dict[str, str]:
    """Deterministic token → concrete-value assignment for one example.

    Values come from fixture pools, drawn without replacement per pool;
    time and five-tuple placeholders are filled format-aware so the
    substituted program always parses.
    """
    digest = zlib.crc32(" ".join(example.nile).encode("utf-8"))
    rng = np.random.default_rng([seed, digest])
    drawn: dict[tuple[str, ...], list[str]] = {}

    def draw(pool: tuple[str, ...]) -> str:
        if pool not in drawn:
            drawn[pool] = [str(pool[int(i)]) for i in rng.permutation(len(pool))]
        return drawn[pool].pop()

    toks = list(example.nile)
    mapping: dict[str, str] = {}
    times: list[tuple[str, tuple[str, ...]]] = []
    for i, tok in enumerate(toks):
        if not tok.startswith("@") or tok in mapping:
            continue
        base = tok.split("#")[0]
        if base in ("@start_time", "@end_time"):
            kind = toks[i - 3]  # ... start hour ( ' @start_time
            pool = {"hour": HOUR_POOL, "date": DATE_POOL, "datetime": DATETIME_POOL}[kind]
            times.append((tok, pool))
            mapping[tok] = ""  # placeholder; ordered fill below
            continue
        if base == "@value" and i >= 2 and toks[i - 2] == ":":
            key = toks[i - 3]
            if key == "protocol":
                mapping[tok] = draw(PROTOCOL_POOL)
            elif key.endswith("_port"):
                mapping[tok] = draw(PORT_POOL)
            else:
                mapping[tok] = draw(IP_POOL)
            continue
        mapping[tok] = draw(_pool_for(base))

    if times:
        pool = times[0][1]
        values = sorted(draw(pool) for _ in times)
        for (tok, _), value in zip(times, values):
            mapping[tok] = value
    return mapping


def substitute_dummies(example: TrainingExample, seed: int = 0) -> str:
    """Concrete, parseable program text for an anonymized example."""
    mapping = dummy_mapping(example, seed)
    return " ".join(mapping.get(tok, tok) for tok in example.nile)

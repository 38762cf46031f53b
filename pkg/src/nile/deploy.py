"""Compilation of confirmed intents into service-chain commands.

A confirmed intent becomes a list of ``vim-emu`` command lines: one
``compute start`` per middlebox, then ``network add`` links forming a
single chain from the origin endpoint through every middlebox to the
destination.  Compilation is a dry run; commands are emitted as text
and never executed.

Before emitting, the compiler checks the intent against a declarative
:class:`NetworkModel`.  A throughput demand that exceeds the best
bottleneck capacity between the two endpoints becomes an error-level
conflict; clauses the chain stage cannot realize (client targets,
intervals, traffic rules, non-throughput metrics) become warnings.
Commands are produced even when errors exist, so callers can preview
a rejected deployment.
"""

from __future__ import annotations

import heapq
import ipaddress
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .lang import (
    Interval,
    Locations,
    Middleboxes,
    NileIntent,
    Qos,
    Rule,
    Targets,
    validate_intent,
)

# Shell names used in emitted commands, keyed by middlebox id.
ABBREVIATIONS = {
    "firewall": "fw",
    "ids": "ids",
    "dpi": "dpi",
    "proxy": "proxy",
    "cache": "cache",
    "nat": "nat",
    "loadbalancer": "lb",
}

# Each vnf takes a block of host addresses; in/out interfaces use the
# first two.  Blocks start at .20, so the first two vnfs land on
# .20/.21 and .30/.31.
IP_BLOCK_START = 20
IP_BLOCK_SIZE = 10

_RATE_UNITS_BPS = {"bps": 1.0, "kbps": 1e3, "mbps": 1e6, "gbps": 1e9}

# Constraints that demand a minimum; "less"-side bounds shape traffic
# and assert nothing about link capacity.
_MINIMUM_CONSTRAINTS = {"more", "more or equal", "equal"}


class UnresolvedId(Exception):
    """A middlebox or endpoint id has no counterpart in the network model."""

    def __init__(self, id: str):
        self.id = id
        super().__init__(f"id not present in network model: {id!r}")


@dataclass(frozen=True)
class Endpoint:
    id: str
    attach: str  # "host:interface" as used by network add

    @property
    def node(self) -> str:
        return self.attach.split(":", 1)[0]


@dataclass(frozen=True)
class Link:
    a: str
    b: str
    capacity: float  # mbps

    def __post_init__(self):
        if self.capacity <= 0:
            raise ValueError(f"link {self.a}<->{self.b} capacity must be positive")


@dataclass(frozen=True)
class VnfImage:
    image: str
    start: str


@dataclass(frozen=True)
class NetworkModel:
    """Declarative scenario: endpoints, links, deployable images, addressing."""

    datacenter: str
    ip_pool: ipaddress.IPv4Network
    endpoints: tuple[Endpoint, ...]
    links: tuple[Link, ...]
    vnf_images: dict[str, VnfImage] = field(default_factory=dict)

    def __post_init__(self):
        ids = [ep.id for ep in self.endpoints]
        if len(ids) != len(set(ids)):
            raise ValueError("endpoint ids must be unique")

    def endpoint(self, id: str) -> Endpoint:
        for ep in self.endpoints:
            if ep.id == id:
                return ep
        raise UnresolvedId(id)

    def image(self, middlebox_id: str) -> VnfImage:
        try:
            return self.vnf_images[middlebox_id]
        except KeyError:
            raise UnresolvedId(middlebox_id) from None

    @classmethod
    def from_dict(cls, raw: dict) -> "NetworkModel":
        return cls(
            datacenter=raw["datacenter"],
            ip_pool=ipaddress.IPv4Network(raw["ip_pool"]),
            endpoints=tuple(
                Endpoint(ep["id"], ep["attach"]) for ep in raw["endpoints"]
            ),
            links=tuple(
                Link(l["a"], l["b"], float(l["capacity"])) for l in raw["links"]
            ),
            vnf_images={
                mb: VnfImage(img["image"], img["start"])
                for mb, img in raw.get("vnf_images", {}).items()
            },
        )

    @classmethod
    def load(cls, path: str | Path) -> "NetworkModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def default_network() -> NetworkModel:
    """The shipped two-switch test scenario (iperf + web hosts)."""
    ref = resources.files("nile") / "data" / "iperf_scenario.json"
    return NetworkModel.from_dict(json.loads(ref.read_text(encoding="utf-8")))


@dataclass(frozen=True)
class Conflict:
    severity: str  # "warn" | "error"
    message: str
    clause: str  # reference into the intent, e.g. "qos[3]"

    def __post_init__(self):
        if self.severity not in ("warn", "error"):
            raise ValueError(f"unknown severity: {self.severity!r}")


@dataclass(frozen=True)
class ConflictReport:
    conflicts: tuple[Conflict, ...] = ()

    @property
    def deployable(self) -> bool:
        return not self.errors()

    def errors(self) -> list[Conflict]:
        return [c for c in self.conflicts if c.severity == "error"]

    def warnings(self) -> list[Conflict]:
        return [c for c in self.conflicts if c.severity == "warn"]


@dataclass(frozen=True)
class VnfCommand:
    """One vim-emu invocation; renders to a single line."""

    verb: str  # "compute-start" | "network-add"
    args: tuple[tuple[str, str], ...]

    def render(self) -> str:
        head = {"compute-start": "vim-emu compute start",
                "network-add": "vim-emu network add"}[self.verb]
        parts = [head]
        for key, value in self.args:
            if not value:
                parts.append(key)
            elif key == "-c":
                parts.append(f'{key} "{value}"')
            elif key == "--net":
                parts.append(f'{key}"{value}"')
            else:
                parts.append(f"{key} {value}")
        return " ".join(parts)


def render_commands(cmds: list[VnfCommand]) -> str:
    """One line per command; empty input renders to empty text."""
    if not cmds:
        return ""
    return "\n".join(c.render() for c in cmds) + "\n"


def bottleneck_capacity(net: NetworkModel, src_node: str, dst_node: str) -> float:
    """Best achievable bandwidth between two nodes: the maximum over
    paths of the minimum link capacity along the path.  Returns 0.0
    when no path exists."""
    if src_node == dst_node:
        return float("inf")
    adjacency: dict[str, list[tuple[str, float]]] = {}
    for link in net.links:
        adjacency.setdefault(link.a, []).append((link.b, link.capacity))
        adjacency.setdefault(link.b, []).append((link.a, link.capacity))
    best = {src_node: float("inf")}
    queue = [(-float("inf"), src_node)]
    while queue:
        neg_width, node = heapq.heappop(queue)
        width = -neg_width
        if width < best.get(node, 0.0):
            continue
        if node == dst_node:
            return width
        for nxt, capacity in adjacency.get(node, []):
            reach = min(width, capacity)
            if reach > best.get(nxt, 0.0):
                best[nxt] = reach
                heapq.heappush(queue, (-reach, nxt))
    return best.get(dst_node, 0.0)


def rate_mbps(value: str) -> float | None:
    """Parse '100mbps'-style rates to mbps; None for non-rate values."""
    text = value.strip().lower()
    # longest unit first, so 'mbps' wins over its 'bps' suffix
    for unit, bps in sorted(_RATE_UNITS_BPS.items(), key=lambda u: -len(u[0])):
        if text.endswith(unit):
            number = text[: -len(unit)].strip()
            try:
                return float(number) * bps / 1e6
            except ValueError:
                return None
    return None


def _vnf_ips(net: NetworkModel, index: int) -> tuple[str, str]:
    base = IP_BLOCK_START + IP_BLOCK_SIZE * index
    prefix = net.ip_pool.prefixlen
    first = net.ip_pool.network_address + base
    second = net.ip_pool.network_address + base + 1
    if second not in net.ip_pool:
        raise ValueError("ip pool exhausted: too many middleboxes for the pool")
    return f"{first}/{prefix}", f"{second}/{prefix}"


def _clause_ref(intent: NileIntent, clause) -> str:
    names = {Locations: "locations", Targets: "targets", Middleboxes: "middleboxes",
             Qos: "qos", Rule: "rules", Interval: "interval"}
    return f"{names[type(clause)]}[{intent.commands.index(clause)}]"


def _qos_conflicts(intent: NileIntent, net: NetworkModel) -> list[Conflict]:
    found: list[Conflict] = []
    locations = intent.locations()
    for clause in intent.clauses(Qos):
        ref = _clause_ref(intent, clause)
        for metric in clause.metrics:
            if metric.metric_id != "throughput":
                found.append(Conflict(
                    "warn",
                    f"{metric.metric_id} is unverifiable at compile time",
                    ref,
                ))
                continue
            if metric.constraint not in _MINIMUM_CONSTRAINTS:
                found.append(Conflict(
                    "warn",
                    f"throughput constraint {metric.constraint!r} asserts no "
                    "minimum; not checked against capacity",
                    ref,
                ))
                continue
            demand = rate_mbps(metric.value)
            if demand is None:
                found.append(Conflict(
                    "warn",
                    f"throughput value {metric.value!r} is not a rate; "
                    "not checked against capacity",
                    ref,
                ))
                continue
            if locations is None:
                found.append(Conflict(
                    "warn",
                    "throughput demand has no endpoints to check against",
                    ref,
                ))
                continue
            origin = net.endpoint(locations.origin.id)
            destination = net.endpoint(locations.destination.id)
            capacity = bottleneck_capacity(net, origin.node, destination.node)
            if capacity == 0.0:
                found.append(Conflict(
                    "error",
                    f"bandwidth: no path between {origin.id!r} and "
                    f"{destination.id!r}",
                    ref,
                ))
            elif demand > capacity:
                found.append(Conflict(
                    "error",
                    f"bandwidth exceeds path capacity: demand {demand:g}mbps, "
                    f"best path supports {capacity:g}mbps",
                    ref,
                ))
    return found


def _unsupported_clause_warnings(intent: NileIntent) -> list[Conflict]:
    notes = [
        (Targets, "client identification is not supported by the chain "
                  "stage yet; clause ignored"),
        (Rule, "traffic rules are not supported by the chain stage yet; "
               "clause ignored"),
        (Interval, "time intervals are not supported by the chain stage "
                   "yet; clause ignored"),
    ]
    found = []
    for cls, message in notes:
        for clause in intent.clauses(cls):
            found.append(Conflict("warn", message, _clause_ref(intent, clause)))
    return found


def compile_intent(intent: NileIntent, net: NetworkModel) -> tuple[list[VnfCommand], ConflictReport]:
    """Compile a validated intent against a network model.

    Returns the command list and a conflict report.  Commands are
    emitted even when the report carries errors, so a rejected intent
    can still be previewed; callers must gate real deployment on
    ``report.deployable``.
    """
    report = validate_intent(intent)
    if not report.ok:
        problems = "; ".join(p.message for p in report.problems)
        raise ValueError(f"intent fails validation: {problems}")

    middleboxes = intent.middlebox_ids()
    locations = intent.locations()
    if locations is not None:
        origin = net.endpoint(locations.origin.id)
        destination = net.endpoint(locations.destination.id)

    conflicts: list[Conflict] = []
    commands: list[VnfCommand] = []

    names: list[str] = []
    for index, middlebox in enumerate(middleboxes):
        image = net.image(middlebox)
        name = ABBREVIATIONS.get(middlebox, middlebox)
        names.append(name)
        ip_in, ip_out = _vnf_ips(net, index)
        commands.append(VnfCommand("compute-start", (
            ("-d", net.datacenter),
            ("-n", name),
            ("-i", image.image),
            ("-c", image.start),
            ("--net", f"(id=in,ip={ip_in}),(id=out,ip={ip_out})"),
        )))

    if locations is not None:
        hops = [origin.attach]
        for name in names:
            hops.append(f"{name}:in")
            hops.append(f"{name}:out")
        hops.append(destination.attach)
        for src, dst in zip(hops[::2], hops[1::2]):
            commands.append(VnfCommand("network-add", (
                ("-b", ""), ("-src", src), ("-dst", dst),
            )))
    elif middleboxes:
        conflicts.append(Conflict(
            "warn",
            "no from/to endpoints; middleboxes started but not chained",
            _clause_ref(intent, intent.clauses(Middleboxes)[0]),
        ))

    if not commands:
        conflicts.append(Conflict(
            "warn", "intent emits no commands; handled as assertions only",
            "intent",
        ))

    conflicts.extend(_unsupported_clause_warnings(intent))
    conflicts.extend(_qos_conflicts(intent, net))
    return commands, ConflictReport(tuple(conflicts))

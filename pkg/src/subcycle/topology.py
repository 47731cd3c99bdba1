"""Optical network graph model: spans with capacities, parsing, matrices, validation."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterable

import networkx as nx
import numpy as np

SpanKey = tuple[str, str]

_TOP_FIELDS = {"name", "nodes", "spans"}
_SPAN_FIELDS = {"u", "v", "working", "cost", "total"}


class TopologyError(ValueError):
    """Raised for malformed or inconsistent topology documents."""


def span_key(u: str, v: str) -> SpanKey:
    """Orientation-free identifier of the span between ``u`` and ``v``."""
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class Span:
    u: str
    v: str
    working: int = 0
    cost: int = 1
    total: int = 0

    @property
    def key(self) -> SpanKey:
        return span_key(self.u, self.v)

    @property
    def max_spare(self) -> int:
        """Spare units that still fit on the span."""
        return self.total - self.working

    def other(self, node: str) -> str:
        if node == self.u:
            return self.v
        if node == self.v:
            return self.u
        raise KeyError(node)


@dataclass(frozen=True)
class Topology:
    name: str
    nodes: tuple[str, ...]
    spans: tuple[Span, ...]
    _index: dict[SpanKey, Span] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "spans", tuple(self.spans))
        if not self.nodes:
            raise TopologyError("topology has no nodes")
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise TopologyError("duplicate node identifier")
        index: dict[SpanKey, Span] = {}
        for s in self.spans:
            for end in (s.u, s.v):
                if end not in known:
                    raise TopologyError(f"unknown node {end!r} in span ({s.u}, {s.v})")
            if s.u == s.v:
                raise TopologyError(f"self-loop on node {s.u!r}")
            if s.key in index:
                raise TopologyError(f"duplicate span ({s.u}, {s.v})")
            if s.working < 0 or s.total < 0:
                raise TopologyError(f"negative capacity on span ({s.u}, {s.v})")
            if s.cost <= 0:
                raise TopologyError(f"non-positive cost on span ({s.u}, {s.v})")
            if s.working > s.total:
                raise TopologyError(f"working > total on span ({s.u}, {s.v})")
            index[s.key] = s
        object.__setattr__(self, "_index", index)

    def span(self, u: str, v: str) -> Span:
        return self._index[span_key(u, v)]

    def has_span(self, u: str, v: str) -> bool:
        return span_key(u, v) in self._index

    @property
    def span_keys(self) -> list[SpanKey]:
        return [s.key for s in self.spans]

    def neighbors(self) -> dict[str, list[str]]:
        """Adjacency lists in declaration order."""
        adj: dict[str, list[str]] = {n: [] for n in self.nodes}
        for s in self.spans:
            adj[s.u].append(s.v)
            adj[s.v].append(s.u)
        return adj

    def degree(self, node: str) -> int:
        return sum(1 for s in self.spans if node in (s.u, s.v))

    def total_working(self) -> int:
        return sum(s.working for s in self.spans)

    def total_capacity(self) -> int:
        return sum(s.total for s in self.spans)

    def total_max_spare(self) -> int:
        return sum(s.max_spare for s in self.spans)

    def subgraph(self, spans: Iterable[Span], name: str | None = None) -> "Topology":
        """Topology over the given spans; node order follows this topology."""
        spans = list(spans)
        used = {x for s in spans for x in (s.u, s.v)}
        order = {key: i for i, key in enumerate(self.span_keys)}
        spans.sort(key=lambda s: order.get(s.key, len(order)))
        return Topology(
            name=name or self.name,
            nodes=tuple(n for n in self.nodes if n in used),
            spans=tuple(spans),
        )

    def with_working(self, working: dict[SpanKey, int]) -> "Topology":
        return replace(
            self,
            spans=tuple(replace(s, working=working.get(s.key, s.working)) for s in self.spans),
        )

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from((s.u, s.v) for s in self.spans)
        return g


# ---------------------------------------------------------------------------
# documents


def topology_from_dict(doc: Any) -> Topology:
    if not isinstance(doc, dict):
        raise TopologyError("topology document must be an object")
    extra = set(doc) - _TOP_FIELDS
    if extra:
        raise TopologyError(f"unknown field(s): {sorted(extra)}")
    missing = _TOP_FIELDS - set(doc)
    if missing:
        raise TopologyError(f"missing field(s): {sorted(missing)}")
    name, nodes, spans = doc["name"], doc["nodes"], doc["spans"]
    if not isinstance(name, str):
        raise TopologyError("'name' must be a string")
    if not isinstance(nodes, list) or not all(isinstance(n, str) for n in nodes):
        raise TopologyError("'nodes' must be an array of strings")
    if not isinstance(spans, list):
        raise TopologyError("'spans' must be an array")
    parsed = []
    for i, item in enumerate(spans):
        if not isinstance(item, dict):
            raise TopologyError(f"span #{i} is not an object")
        extra = set(item) - _SPAN_FIELDS
        if extra:
            raise TopologyError(f"span #{i}: unknown field(s) {sorted(extra)}")
        missing = _SPAN_FIELDS - set(item)
        if missing:
            raise TopologyError(f"span #{i}: missing field(s) {sorted(missing)}")
        u, v = item["u"], item["v"]
        if not isinstance(u, str) or not isinstance(v, str):
            raise TopologyError(f"span #{i}: endpoints must be strings")
        nums = {}
        for key in ("working", "cost", "total"):
            val = item[key]
            if isinstance(val, bool) or not isinstance(val, int):
                raise TopologyError(f"span #{i}: {key!r} must be an integer")
            nums[key] = val
        parsed.append(Span(u, v, **nums))
    return Topology(name=name, nodes=tuple(nodes), spans=tuple(parsed))


def topology_to_dict(t: Topology) -> dict[str, Any]:
    return {
        "name": t.name,
        "nodes": list(t.nodes),
        "spans": [
            {"u": s.u, "v": s.v, "working": s.working, "cost": s.cost, "total": s.total}
            for s in t.spans
        ],
    }


def parse_topology(text: str) -> Topology:
    """Parse a JSON topology document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyError(f"malformed document: {exc}") from exc
    return topology_from_dict(doc)


def emit_topology(t: Topology) -> str:
    return json.dumps(topology_to_dict(t), indent=2) + "\n"


def load_topology(path: str | Path) -> Topology:
    return parse_topology(Path(path).read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# matrices


def adjacency(t: Topology) -> np.ndarray:
    idx = {n: i for i, n in enumerate(t.nodes)}
    a = np.zeros((len(t.nodes), len(t.nodes)))
    for s in t.spans:
        a[idx[s.u], idx[s.v]] = a[idx[s.v], idx[s.u]] = 1.0
    return a


def degree_matrix(t: Topology) -> np.ndarray:
    return np.diag(adjacency(t).sum(axis=1))


def laplacian(t: Topology) -> np.ndarray:
    """L = D - A, rows and columns in node declaration order."""
    return degree_matrix(t) - adjacency(t)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class ValidationReport:
    connected: bool
    bridges: tuple[SpanKey, ...]
    protectable: bool


def bridges(t: Topology) -> list[SpanKey]:
    """Spans lying on no cycle, in declaration order."""
    found = {span_key(u, v) for u, v in nx.bridges(t.to_networkx())}
    return [k for k in t.span_keys if k in found]


def is_connected(t: Topology) -> bool:
    return nx.is_connected(t.to_networkx())


def validate(t: Topology) -> ValidationReport:
    connected = is_connected(t)
    br = bridges(t)
    loaded = any(t.span(*k).working > 0 for k in br)
    return ValidationReport(connected=connected, bridges=tuple(br), protectable=connected and not loaded)

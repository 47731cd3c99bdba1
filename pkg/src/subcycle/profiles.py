"""Bundled topologies and seeded capacity profiles matching published network totals.

Only network totals are published for the four reference networks, so the
per-span split is generated: each total is spread over the spans in
near-uniform integer units, with the leftover units placed by a seeded draw.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .topology import Span, Topology, parse_topology


@dataclass(frozen=True)
class CapacityProfile:
    total: int
    working: int

    @property
    def max_spare(self) -> int:
        return self.total - self.working


# network totals: total capacity, working capacity
NETWORK_TOTALS = {
    "net1": CapacityProfile(total=880, working=300),
    "net2": CapacityProfile(total=1120, working=390),
    "cost239": CapacityProfile(total=1680, working=510),
    "nsfnet": CapacityProfile(total=1760, working=550),
}

BUNDLED = tuple(NETWORK_TOTALS)

# Net1/Net2 are only available as drawings; these edge lists are
# 6-node/11-span and 8-node/14-span stand-ins, not the original graphs.
_EDGES = {
    "net1": [
        ("1", "2"), ("2", "3"), ("3", "4"), ("4", "5"), ("5", "6"), ("6", "1"),
        ("1", "3"), ("1", "4"), ("2", "5"), ("3", "6"), ("4", "6"),
    ],
    "net2": [
        ("1", "2"), ("2", "3"), ("3", "4"), ("4", "5"), ("5", "6"), ("6", "7"),
        ("7", "8"), ("8", "1"), ("1", "3"), ("1", "5"), ("2", "6"), ("3", "7"),
        ("4", "8"), ("6", "8"),
    ],
    "cost239": [
        ("Copenhagen", "London"), ("Copenhagen", "Berlin"), ("Copenhagen", "Prague"),
        ("Copenhagen", "Amsterdam"), ("London", "Amsterdam"), ("London", "Paris"),
        ("London", "Brussels"), ("Amsterdam", "Berlin"), ("Amsterdam", "Brussels"),
        ("Amsterdam", "Luxembourg"), ("Berlin", "Prague"), ("Berlin", "Vienna"),
        ("Berlin", "Paris"), ("Brussels", "Paris"), ("Brussels", "Luxembourg"),
        ("Brussels", "Milan"), ("Luxembourg", "Paris"), ("Luxembourg", "Prague"),
        ("Luxembourg", "Zurich"), ("Paris", "Zurich"), ("Paris", "Milan"),
        ("Prague", "Vienna"), ("Prague", "Zurich"), ("Vienna", "Milan"),
        ("Vienna", "Zurich"), ("Milan", "Zurich"),
    ],
    # NSFNET T1 backbone, 14 nodes / 21 spans
    "nsfnet": [
        ("WA", "CA1"), ("WA", "CA2"), ("WA", "UT"), ("CA1", "CA2"), ("CA1", "IL"),
        ("CA2", "TX"), ("UT", "CO"), ("UT", "MI"), ("CO", "TX"), ("CO", "NE"),
        ("TX", "GA"), ("TX", "MD"), ("NE", "IL"), ("IL", "PA"), ("PA", "GA"),
        ("PA", "NY"), ("PA", "NJ"), ("MI", "NY"), ("MI", "NJ"), ("NY", "MD"),
        ("NJ", "MD"),
    ],
}

_NODES = {
    "net1": ["1", "2", "3", "4", "5", "6"],
    "net2": ["1", "2", "3", "4", "5", "6", "7", "8"],
    "cost239": [
        "Amsterdam", "Berlin", "Brussels", "Copenhagen", "London", "Luxembourg",
        "Milan", "Paris", "Prague", "Vienna", "Zurich",
    ],
    "nsfnet": ["WA", "CA1", "CA2", "UT", "CO", "TX", "NE", "IL", "PA", "GA", "MI", "NY", "NJ", "MD"],
}

_TITLES = {
    "net1": "Net1 N06L11 (stand-in)",
    "net2": "Net2 N8L14 (stand-in)",
    "cost239": "Net3 COST239",
    "nsfnet": "Net4 NSFNET",
}


def spread(total: int, count: int, rng: np.random.Generator) -> list[int]:
    """Split ``total`` into ``count`` integers differing by at most one."""
    if count <= 0:
        raise ValueError("count must be positive")
    base, extra = divmod(total, count)
    out = [base] * count
    for i in rng.permutation(count)[:extra]:
        out[int(i)] += 1
    return out


def assign_capacities(t: Topology, profile: CapacityProfile, seed: int = 0, cost: int = 1) -> Topology:
    """Return ``t`` with per-span working/total summing exactly to ``profile``."""
    rng = np.random.default_rng(seed)
    m = len(t.spans)
    working = spread(profile.working, m, rng)
    total = spread(profile.total, m, rng)
    spans = []
    for s, w, c in zip(t.spans, working, total):
        if w > c:
            raise ValueError(f"profile leaves span ({s.u}, {s.v}) with working > total")
        spans.append(replace(s, working=w, total=c, cost=cost))
    return replace(t, spans=tuple(spans))


def skeleton(name: str) -> Topology:
    """Capacity-free topology of a bundled network."""
    return Topology(
        name=_TITLES[name],
        nodes=tuple(_NODES[name]),
        spans=tuple(Span(u, v) for u, v in _EDGES[name]),
    )


def generate(name: str, seed: int = 0) -> Topology:
    return assign_capacities(skeleton(name), NETWORK_TOTALS[name], seed=seed)


def load_bundled(name: str, seed: int | None = None) -> Topology:
    """Bundled profile from the data files, or regenerated when ``seed`` is given."""
    if name not in NETWORK_TOTALS:
        raise KeyError(f"unknown bundled topology {name!r}; choose from {', '.join(BUNDLED)}")
    if seed is not None:
        return generate(name, seed)
    text = resources.files("subcycle.data").joinpath(f"{name}.json").read_text(encoding="utf-8")
    return parse_topology(text)


def profile_for(t: Topology) -> CapacityProfile | None:
    """Published totals matching ``t`` by title, if any."""
    for name, title in _TITLES.items():
        if t.name == title:
            return NETWORK_TOTALS[name]
    return None

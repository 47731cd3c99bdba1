"""Candidate p-cycle enumeration and span coverage classification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .topology import SpanKey, Topology, span_key

DEFAULT_CYCLE_CAP = 200_000


class EnumerationLimitError(RuntimeError):
    """Too many cycles; bound the cycle length with ``max_hops``."""


class NotACycleError(ValueError):
    pass


@dataclass(frozen=True)
class PCycle:
    """An elementary cycle together with what it protects inside its host graph.

    ``coverage`` holds 1 for on-cycle spans and 2 for straddling spans; spans
    the cycle does not protect are absent. ``crossing`` lists the spans the
    cycle occupies spare capacity on.
    """

    nodes: tuple[str, ...]
    oncycle: frozenset[SpanKey]
    straddling: frozenset[SpanKey]
    cost: int

    def coverage(self, key: SpanKey) -> int:
        if key in self.oncycle:
            return 1
        if key in self.straddling:
            return 2
        return 0

    def crossing(self, key: SpanKey) -> int:
        return 1 if key in self.oncycle else 0

    @property
    def coverage_map(self) -> dict[SpanKey, int]:
        out = {k: 1 for k in self.oncycle}
        out.update({k: 2 for k in self.straddling})
        return out

    @property
    def hops(self) -> int:
        return len(self.nodes)

    def label(self) -> str:
        return "-".join(self.nodes)


def canonical(seq: Sequence[str]) -> tuple[str, ...]:
    """Rotate to start at the smallest id; orient so the 2nd id < the last."""
    seq = list(seq)
    if len(seq) < 3:
        raise NotACycleError(f"cycle needs at least 3 nodes, got {seq}")
    i = seq.index(min(seq))
    rot = seq[i:] + seq[:i]
    if rot[1] > rot[-1]:
        rot = [rot[0]] + rot[:0:-1]
    return tuple(rot)


def cycle_spans(seq: Sequence[str]) -> list[SpanKey]:
    return [span_key(a, b) for a, b in zip(seq, list(seq[1:]) + [seq[0]])]


def classify_coverage(seq: Sequence[str], t: Topology) -> PCycle:
    """Build the PCycle for node sequence ``seq`` in host ``t``."""
    nodes = canonical(seq)
    if len(set(nodes)) != len(nodes):
        raise NotACycleError(f"repeated node in {list(seq)}")
    on = cycle_spans(nodes)
    for key in on:
        if not t.has_span(*key):
            raise NotACycleError(f"span {key} of cycle {list(seq)} not in topology")
    onset = frozenset(on)
    members = set(nodes)
    straddle = frozenset(
        s.key for s in t.spans if s.u in members and s.v in members and s.key not in onset
    )
    cost = sum(t.span(*k).cost for k in onset)
    return PCycle(nodes=nodes, oncycle=onset, straddling=straddle, cost=cost)


def _cycle_sequences(t: Topology, max_hops: int | None, cap: int) -> list[tuple[str, ...]]:
    # Ordered backtracking: each cycle is rooted at its smallest node and
    # extended only through larger nodes; a direction check drops the reversal.
    # Search from a root is restricted to nodes that can still reach it.
    adj = {n: sorted(set(ns)) for n, ns in t.neighbors().items()}
    order = sorted(t.nodes)
    found: list[tuple[str, ...]] = []
    limit = max_hops if max_hops is not None else len(order)
    for root in order:
        allowed = _component_above(adj, root)
        if len(allowed) < 3:
            continue
        path = [root]
        on_path = {root}
        stack = [iter([w for w in adj[root] if w in allowed])]
        while stack:
            w = next(stack[-1], None)
            if w is None:
                stack.pop()
                on_path.discard(path.pop())
                continue
            if w in on_path:
                continue
            path.append(w)
            on_path.add(w)
            if len(path) >= 3 and root in adj[w] and path[1] < w:
                found.append(tuple(path))
                if len(found) > cap:
                    raise EnumerationLimitError(
                        f"more than {cap} cycles in {t.name!r}; set max_hops to bound cycle length"
                    )
            if len(path) < limit:
                stack.append(iter([x for x in adj[w] if x in allowed and x not in on_path]))
            else:
                stack.append(iter(()))
    return found


def _component_above(adj: dict[str, list[str]], root: str) -> set[str]:
    """Nodes >= root reachable from root through nodes >= root."""
    seen = {root}
    todo = [root]
    while todo:
        n = todo.pop()
        for w in adj[n]:
            if w > root and w not in seen:
                seen.add(w)
                todo.append(w)
    return seen


def enumerate_pcycles(
    t: Topology, max_hops: int | None = None, cap: int = DEFAULT_CYCLE_CAP
) -> list[PCycle]:
    """All elementary cycles of ``t`` (length <= max_hops), canonical and sorted."""
    seqs = sorted(_cycle_sequences(t, max_hops, cap), key=lambda c: (len(c), c))
    return [classify_coverage(c, t) for c in seqs]


def pcycle_count(t: Topology, max_hops: int | None = None, cap: int = DEFAULT_CYCLE_CAP) -> int:
    return len(_cycle_sequences(t, max_hops, cap))


def is_fundamental(t: Topology) -> bool:
    """True iff ``t`` is exactly one chordless cycle."""
    if len(t.nodes) < 3 or len(t.spans) != len(t.nodes):
        return False
    if any(t.degree(n) != 2 for n in t.nodes):
        return False
    # degree-2 everywhere with n spans: connected means a single ring
    adj = t.neighbors()
    seen = {t.nodes[0]}
    todo = [t.nodes[0]]
    while todo:
        for w in adj[todo.pop()]:
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen) == len(t.nodes)

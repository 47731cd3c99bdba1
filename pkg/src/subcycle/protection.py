"""Independent restorability and spare-budget checks.

Everything here is recomputed from cycle node sequences and the topologies;
coverage data produced by the solver is never reused.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .topology import SpanKey, Topology, span_key


class PlanError(ValueError):
    """A plan refers to cycles or links that do not exist."""


class NotProtected(ValueError):
    pass


@dataclass(frozen=True)
class PlannedSubgraph:
    """One sub-graph and the cycle copies configured in it."""

    topology: Topology
    cycles: tuple[tuple[tuple[str, ...], int], ...]


def _ring(nodes: Sequence[str]) -> list[SpanKey]:
    return [span_key(a, b) for a, b in zip(nodes, list(nodes[1:]) + [nodes[0]])]


def _arc(nodes: Sequence[str], start: int, stop: int, step: int) -> list[str]:
    n = len(nodes)
    out = [nodes[start]]
    i = start
    while i != stop:
        i = (i + step) % n
        out.append(nodes[i])
    return out


def backup_paths(cycle: Sequence[str], failed: tuple[str, str]) -> list[list[str]]:
    """Restoration routes a cycle offers for a failed span ``failed = (x, y)``.

    On-cycle failure: the rest of the ring, from x to y. Straddling failure:
    both arcs of the ring between x and y.
    """
    nodes = list(cycle)
    x, y = failed
    if x not in nodes or y not in nodes:
        raise NotProtected(f"cycle {'-'.join(nodes)} does not protect {x}-{y}")
    i, j = nodes.index(x), nodes.index(y)
    n = len(nodes)
    if (j - i) % n == 1:
        return [_arc(nodes, i, j, -1)]
    if (i - j) % n == 1:
        return [_arc(nodes, i, j, +1)]
    return sorted([_arc(nodes, i, j, +1), _arc(nodes, i, j, -1)])


@dataclass(frozen=True)
class LinkRow:
    link: SpanKey
    working: int
    provided: int

    @property
    def restorable(self) -> bool:
        return self.provided >= self.working


@dataclass
class RestorationReport:
    rows: list[LinkRow]
    overall: float
    budget_ok: bool = True
    budget_violations: list[SpanKey] = field(default_factory=list)
    spare: dict[SpanKey, int] = field(default_factory=dict)

    @property
    def total_spare(self) -> int:
        return sum(self.spare.values())

    @property
    def unrestorable(self) -> list[SpanKey]:
        return [r.link for r in self.rows if not r.restorable]


def _check_plan(t: Topology, plan: Sequence[PlannedSubgraph]) -> None:
    for sg in plan:
        for s in sg.topology.spans:
            if not t.has_span(s.u, s.v):
                raise PlanError(f"sub-graph {sg.topology.name!r} has unknown link {s.u}-{s.v}")
        for nodes, count in sg.cycles:
            if count < 0:
                raise PlanError(f"negative multiplicity for cycle {'-'.join(nodes)}")
            if len(nodes) < 3 or len(set(nodes)) != len(nodes):
                raise PlanError(f"not an elementary cycle: {'-'.join(nodes)}")
            for k in _ring(nodes):
                if not sg.topology.has_span(*k):
                    raise PlanError(
                        f"cycle {'-'.join(nodes)} uses {k[0]}-{k[1]}, absent from {sg.topology.name!r}"
                    )


def protection_provided(t: Topology, plan: Sequence[PlannedSubgraph]) -> dict[SpanKey, int]:
    """Restoration units per original link, summed over all sub-graphs."""
    _check_plan(t, plan)
    got = {k: 0 for k in t.span_keys}
    for sg in plan:
        for nodes, count in sg.cycles:
            if not count:
                continue
            ring = set(_ring(nodes))
            members = set(nodes)
            for s in sg.topology.spans:
                if s.key in ring:
                    got[s.key] += count
                elif s.u in members and s.v in members:
                    got[s.key] += 2 * count
    return got


def spare_placed(t: Topology, plan: Sequence[PlannedSubgraph]) -> dict[SpanKey, int]:
    _check_plan(t, plan)
    spare = {k: 0 for k in t.span_keys}
    for sg in plan:
        for nodes, count in sg.cycles:
            for k in _ring(nodes):
                spare[k] += count
    return spare


def spare_within_budget(t: Topology, plan: Sequence[PlannedSubgraph]) -> tuple[bool, list[SpanKey]]:
    """Check spare on every link against ``total - working``."""
    spare = spare_placed(t, plan)
    bad = [s.key for s in t.spans if spare[s.key] > s.max_spare]
    return (not bad, bad)


def verify_restorability(t: Topology, plan: Sequence[PlannedSubgraph]) -> RestorationReport:
    got = protection_provided(t, plan)
    rows = [LinkRow(s.key, s.working, got[s.key]) for s in t.spans]
    need = sum(r.working for r in rows)
    covered = sum(min(r.working, r.provided) for r in rows)
    overall = 1.0 if need == 0 else covered / need
    spare = spare_placed(t, plan)
    bad = [s.key for s in t.spans if spare[s.key] > s.max_spare]
    return RestorationReport(rows=rows, overall=overall, budget_ok=not bad, budget_violations=bad, spare=spare)


def simulate_failures(t: Topology, plan: Sequence[PlannedSubgraph]) -> dict[SpanKey, int]:
    """Fail each span in turn and count the concrete backup routes available.

    A route counts only if every hop is a span of the network other than the
    failed one. Returned values are routes per failed span.
    """
    _check_plan(t, plan)
    routes = {k: 0 for k in t.span_keys}
    for failed in t.spans:
        for sg in plan:
            if not sg.topology.has_span(failed.u, failed.v):
                continue
            for nodes, count in sg.cycles:
                if not count or failed.u not in nodes or failed.v not in nodes:
                    continue
                for path in backup_paths(nodes, (failed.u, failed.v)):
                    hops = [span_key(a, b) for a, b in zip(path, path[1:])]
                    if failed.key in hops or not all(t.has_span(*h) for h in hops):
                        continue
                    routes[failed.key] += count
    return routes


def render_report(r: RestorationReport) -> str:
    lines = [f"{'link':<28}{'working':>8}{'provided':>10}  ok"]
    for row in r.rows:
        name = f"{row.link[0]}-{row.link[1]}"
        lines.append(f"{name:<28}{row.working:>8}{row.provided:>10}  {'yes' if row.restorable else 'NO'}")
    lines.append(f"overall restorable fraction: {r.overall:.4f}")
    lines.append(f"total spare: {r.total_spare}")
    lines.append(f"spare within budget: {'yes' if r.budget_ok else 'no'}")
    if r.budget_violations:
        lines.append("over budget: " + ", ".join(f"{u}-{v}" for u, v in r.budget_violations))
    return "\n".join(lines)

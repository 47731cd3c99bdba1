"""Recursive sub-graphing driver and slider capacity split policies."""

from __future__ import annotations

import enum
import itertools
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Iterator, Sequence

from .cycles import is_fundamental, pcycle_count
from .solver import DEFAULT_ENGINE, InfeasibleInstance, build_cover_instance, solve
from .spectral import BisectionError, SplitRejected, bisect, split_subgraphs
from .topology import SpanKey, Topology, validate

log = logging.getLogger(__name__)

EXHAUSTIVE_SLIDER_LIMIT = 10


class SplitPolicy(str, enum.Enum):
    TYPE1 = "type1"  # whole slider capacity to one side (0:k or k:0)
    TYPE2 = "type2"  # even split (k/2 : k/2)


class PartitioningExhausted(RuntimeError):
    """No sub-graph can be split further; ``state`` carries the atomic marks."""

    def __init__(self, message: str, state: "PartitionState | None" = None):
        super().__init__(message)
        self.state = state


class SliderUnprotectable(RuntimeError):
    pass


@dataclass(frozen=True)
class SliderShare:
    span: SpanKey
    k: int
    w1: int
    w2: int


@dataclass(frozen=True)
class SubGraph:
    topology: Topology
    pcycle_count: int
    uid: int
    atomic: bool = False

    @property
    def fundamental(self) -> bool:
        return is_fundamental(self.topology)


@dataclass(frozen=True)
class BisectionRecord:
    iteration: int
    parent: int
    children: tuple[int, int]
    v1: tuple[str, ...]
    v2: tuple[str, ...]
    slider: tuple[SpanKey, ...]
    shares: tuple[SliderShare, ...]
    borrowed: tuple[tuple[SpanKey, ...], tuple[SpanKey, ...]]


@dataclass(frozen=True)
class PartitionState:
    original: Topology
    policy: SplitPolicy
    subgraphs: tuple[SubGraph, ...]
    trace: tuple[int, ...]
    iteration: int = 0
    history: tuple[BisectionRecord, ...] = ()
    max_hops: int | None = None

    @property
    def partitions(self) -> int:
        return len(self.subgraphs)

    @property
    def candidate_total(self) -> int:
        return sum(sg.pcycle_count for sg in self.subgraphs)

    def owners(self) -> dict[SpanKey, list[tuple[int, int]]]:
        """Span -> [(sub-graph uid, working share)] across all sub-graphs."""
        out: dict[SpanKey, list[tuple[int, int]]] = {k: [] for k in self.original.span_keys}
        for sg in self.subgraphs:
            for s in sg.topology.spans:
                out.setdefault(s.key, []).append((sg.uid, s.working))
        return out


def split_capacity(k: int, policy: SplitPolicy) -> tuple[int, int]:
    """Slider share (first side, second side); Type I orientation is decided later."""
    if k < 0:
        raise ValueError("capacity must be nonnegative")
    if SplitPolicy(policy) is SplitPolicy.TYPE2:
        return (k - k // 2, k // 2)
    return (k, 0)


SideCost = Callable[[Topology, dict[SpanKey, int]], float]


def solver_cost(engine: str = DEFAULT_ENGINE, max_hops: int | None = None) -> SideCost:
    def cost(g: Topology, working: dict[SpanKey, int]) -> float:
        try:
            inst = build_cover_instance(g, working=working, max_hops=max_hops)
        except InfeasibleInstance:
            return math.inf
        return float(solve(inst, engine)[0].objective)

    return cost


def typeI_assign(
    spans: Sequence[tuple[SpanKey, int]],
    g1: Topology,
    g2: Topology,
    side_cost: SideCost,
) -> dict[SpanKey, int]:
    """Pick, per shared slider span, the side (0 or 1) carrying all of its k.

    Exhaustive over orientations for up to ``EXHAUSTIVE_SLIDER_LIMIT`` spans
    with k > 0, otherwise one greedy pass of single-span flips.
    """
    live = [(key, k) for key, k in spans if k > 0]
    out = {key: 0 for key, _ in spans}
    if not live:
        return out
    cache: dict[tuple[int, frozenset[SpanKey]], float] = {}

    def side(i: int, mine: frozenset[SpanKey]) -> float:
        hit = cache.get((i, mine))
        if hit is None:
            g = (g1, g2)[i]
            working = {key: (k if key in mine else 0) for key, k in live}
            hit = cache[(i, mine)] = side_cost(g, working)
        return hit

    def total(orient: Sequence[int]) -> float:
        first = frozenset(key for (key, _), o in zip(live, orient) if o == 0)
        second = frozenset(key for (key, _), o in zip(live, orient) if o == 1)
        return side(0, first) + side(1, second)

    if len(live) <= EXHAUSTIVE_SLIDER_LIMIT:
        best, best_cost = None, math.inf
        for orient in itertools.product((0, 1), repeat=len(live)):
            c = total(orient)
            if c < best_cost:
                best, best_cost = orient, c
    else:
        orient = [0] * len(live)
        best_cost = total(orient)
        for i in range(len(live)):
            trial = list(orient)
            trial[i] = 1
            c = total(trial)
            if c < best_cost:
                orient, best_cost = trial, c
        best = tuple(orient)
    if best is None or math.isinf(best_cost):
        raise SliderUnprotectable("slider span unprotectable under every Type I orientation")
    out.update({key: o for (key, _), o in zip(live, best)})
    return out


def initial_state(
    t: Topology, policy: SplitPolicy = SplitPolicy.TYPE2, max_hops: int | None = None
) -> PartitionState:
    count = pcycle_count(t, max_hops=max_hops)
    return PartitionState(
        original=t,
        policy=SplitPolicy(policy),
        subgraphs=(SubGraph(t, count, uid=0),),
        trace=(count,),
        max_hops=max_hops,
    )


def _next_uid(s: PartitionState) -> int:
    seen = [sg.uid for sg in s.subgraphs] + [c for r in s.history for c in r.children]
    return max(seen) + 1


def partition_step(
    s: PartitionState, side_cost: SideCost | None = None, engine: str = DEFAULT_ENGINE
) -> PartitionState:
    """Bisect the sub-graph with the most candidate cycles.

    Sub-graphs whose bisection is unusable (a half without cycles, a
    disconnected side, or no shrinkage) become atomic and the next one is
    tried. Ties go to the earliest-created sub-graph.
    """
    subgraphs = list(s.subgraphs)
    while True:
        open_ = [i for i, sg in enumerate(subgraphs) if not sg.atomic and not sg.fundamental]
        if not open_:
            raise PartitioningExhausted(
                f"partitioning exhausted after {s.iteration} iteration(s): "
                "every sub-graph is fundamental or atomic",
                replace(s, subgraphs=tuple(subgraphs)),
            )
        pick = max(open_, key=lambda i: (subgraphs[i].pcycle_count, -subgraphs[i].uid))
        parent = subgraphs[pick]
        try:
            b = bisect(parent.topology)
            pair = split_subgraphs(parent.topology, b)
        except (BisectionError, SplitRejected) as exc:
            log.debug("sub-graph %d atomic: %s", parent.uid, exc)
            subgraphs[pick] = replace(parent, atomic=True)
            continue
        counts = [pcycle_count(g, max_hops=s.max_hops) for g in pair.halves]
        m = len(parent.topology.spans)
        if min(counts) < 1 or any(len(g.spans) >= m for g in pair.halves):
            log.debug("sub-graph %d atomic: unusable halves %s", parent.uid, counts)
            subgraphs[pick] = replace(parent, atomic=True)
            continue
        break

    g1, g2 = pair.halves
    ks = [(key, parent.topology.span(*key).working) for key in pair.shared]
    if s.policy is SplitPolicy.TYPE1:
        cost = side_cost or solver_cost(engine, s.max_hops)
        orient = typeI_assign(ks, g1, g2, cost)
        split = {key: ((k, 0) if orient[key] == 0 else (0, k)) for key, k in ks}
    else:
        split = {key: split_capacity(k, SplitPolicy.TYPE2) for key, k in ks}
    g1 = g1.with_working({key: w[0] for key, w in split.items()})
    g2 = g2.with_working({key: w[1] for key, w in split.items()})

    shares = []
    for key in b.slider:
        k = parent.topology.span(*key).working
        if key in split:
            w1, w2 = split[key]
        elif pair.exclusive.get(key) == 0:
            w1, w2 = k, 0
        else:
            w1, w2 = 0, k
        shares.append(SliderShare(key, k, w1, w2))

    uid = _next_uid(s)
    kids = (SubGraph(g1, counts[0], uid), SubGraph(g2, counts[1], uid + 1))
    del subgraphs[pick]
    subgraphs.extend(kids)
    record = BisectionRecord(
        iteration=s.iteration + 1,
        parent=parent.uid,
        children=(uid, uid + 1),
        v1=tuple(n for n in parent.topology.nodes if n in b.v1),
        v2=tuple(n for n in parent.topology.nodes if n in b.v2),
        slider=b.slider,
        shares=tuple(shares),
        borrowed=(tuple(sorted(pair.borrowed[0])), tuple(sorted(pair.borrowed[1]))),
    )
    return replace(
        s,
        subgraphs=tuple(subgraphs),
        trace=s.trace + (sum(sg.pcycle_count for sg in subgraphs),),
        iteration=s.iteration + 1,
        history=s.history + (record,),
    )


def iter_partitions(
    t: Topology,
    target: int | None = None,
    policy: SplitPolicy = SplitPolicy.TYPE2,
    engine: str = DEFAULT_ENGINE,
    max_hops: int | None = None,
    side_cost: SideCost | None = None,
) -> Iterator[PartitionState]:
    """Yield the state after 0, 1, 2, ... iterations until ``target`` or exhaustion."""
    report = validate(t)
    if not report.protectable:
        raise ValueError(
            f"{t.name!r} is not protectable (connected={report.connected}, "
            f"loaded bridges={[b for b in report.bridges if t.span(*b).working > 0]})"
        )
    state = initial_state(t, policy, max_hops)
    yield state
    while target is None or state.partitions < target:
        try:
            state = partition_step(state, side_cost=side_cost, engine=engine)
        except PartitioningExhausted as exc:
            log.info("%s", exc)
            return
        yield state


def run_partitioning(
    t: Topology,
    target: int | None = None,
    policy: SplitPolicy = SplitPolicy.TYPE2,
    engine: str = DEFAULT_ENGINE,
    max_hops: int | None = None,
) -> PartitionState:
    state = None
    for state in iter_partitions(t, target, policy, engine, max_hops):
        pass
    assert state is not None
    return state

"""Spare-capacity ILP over pre-computed candidate p-cycles.

The spare variables are substituted out (each one sits at its lower bound at
any optimum because link costs are positive), leaving a covering program in
the cycle multiplicities::

    min  sum_p cost_p * N_p
    s.t. sum_p coverage(l, p) * N_p >= W_l      for every link l
         N_p >= 0 integer
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cycles import PCycle, enumerate_pcycles
from scipy.optimize import LinearConstraint, milp

from .lp import simplex_min
from .topology import SpanKey, Topology

ORACLE_MAX_CANDIDATES = 12
ORACLE_MAX_CAP = 5
ENGINES = ("highs", "bnb")
DEFAULT_ENGINE = "highs"


class InfeasibleInstance(ValueError):
    def __init__(self, links: Sequence[SpanKey]):
        self.links = list(links)
        names = ", ".join(f"{u}-{v}" for u, v in self.links)
        super().__init__(f"no candidate cycle protects link(s): {names}")


class OracleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class Link:
    key: SpanKey
    working: int
    cost: int


@dataclass(frozen=True)
class Candidate:
    id: str
    nodes: tuple[str, ...]
    coverage: dict[SpanKey, int]
    crossing: frozenset[SpanKey]
    unit_cost: int


@dataclass(frozen=True)
class CoverInstance:
    name: str
    links: tuple[Link, ...]
    candidates: tuple[Candidate, ...]

    def coverage_matrix(self) -> np.ndarray:
        m = np.zeros((len(self.links), len(self.candidates)))
        for j, cand in enumerate(self.candidates):
            for i, link in enumerate(self.links):
                m[i, j] = cand.coverage.get(link.key, 0)
        return m

    def crossing_matrix(self) -> np.ndarray:
        m = np.zeros((len(self.links), len(self.candidates)))
        for j, cand in enumerate(self.candidates):
            for i, link in enumerate(self.links):
                if link.key in cand.crossing:
                    m[i, j] = 1.0
        return m

    def demand(self) -> np.ndarray:
        return np.array([link.working for link in self.links], dtype=float)

    def costs(self) -> np.ndarray:
        return np.array([c.unit_cost for c in self.candidates], dtype=float)


@dataclass
class Solution:
    multiplicities: dict[str, int]
    spare: dict[SpanKey, int]
    objective: int
    status: str = "optimal"

    def used(self) -> dict[str, int]:
        return {k: n for k, n in self.multiplicities.items() if n}


@dataclass
class SolveStats:
    variable_count: int
    constraint_count: int
    wall_time: float = 0.0
    nodes_explored: int = 0
    lp_pivots: int = 0


@dataclass
class LPRelaxation:
    value: float
    x: np.ndarray
    pivots: int = 0


def build_cover_instance(
    g: Topology,
    candidates: Sequence[PCycle] | None = None,
    working: dict[SpanKey, int] | None = None,
    max_hops: int | None = None,
) -> CoverInstance:
    """Covering instance for sub-graph ``g``.

    ``working`` overrides per-link demand (slider shares); otherwise the
    span's own working capacity is used.
    """
    if candidates is None:
        candidates = enumerate_pcycles(g, max_hops=max_hops)
    links = tuple(
        Link(s.key, (working or {}).get(s.key, s.working), s.cost) for s in g.spans
    )
    cands = tuple(
        Candidate(
            id=f"p{j + 1}",
            nodes=c.nodes,
            coverage={k: v for k, v in c.coverage_map.items() if g.has_span(*k)},
            crossing=frozenset(c.oncycle),
            unit_cost=sum(g.span(*k).cost for k in c.oncycle),
        )
        for j, c in enumerate(candidates)
    )
    bad = [l.key for l in links if l.working > 0 and not any(c.coverage.get(l.key, 0) for c in cands)]
    if bad:
        raise InfeasibleInstance(bad)
    return CoverInstance(name=g.name, links=links, candidates=cands)


def make_solution(inst: CoverInstance, counts: Sequence[int]) -> Solution:
    counts = [int(n) for n in counts]
    mult = {c.id: n for c, n in zip(inst.candidates, counts)}
    spare = {l.key: 0 for l in inst.links}
    for c, n in zip(inst.candidates, counts):
        if n:
            for k in c.crossing:
                spare[k] += n
    objective = sum(l.cost * spare[l.key] for l in inst.links)
    return Solution(multiplicities=mult, spare=spare, objective=objective)


def _rows(inst: CoverInstance) -> tuple[np.ndarray, np.ndarray]:
    a = inst.coverage_matrix()
    b = inst.demand()
    live = b > 0
    return a[live], b[live]


def lp_relaxation(inst: CoverInstance) -> LPRelaxation:
    a, b = _rows(inst)
    res = simplex_min(inst.costs(), a, b)
    if res.status != "optimal":
        raise InfeasibleInstance([l.key for l in inst.links if l.working > 0])
    return LPRelaxation(value=res.value, x=res.x, pivots=res.pivots)


def _trim(counts: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Drop cycle copies that are not needed for coverage, dearest first."""
    counts = counts.copy()
    got = a @ counts
    for j in sorted(np.flatnonzero(counts), key=lambda j: (-c[j], j)):
        while counts[j] > 0 and np.all(got - a[:, j] >= b - 1e-9):
            counts[j] -= 1
            got -= a[:, j]
    return counts


def branch_and_bound(inst: CoverInstance) -> tuple[Solution, SolveStats]:
    """Exact branch-and-bound over the in-house LP relaxation.

    Depth-first; branches on the most fractional multiplicity (lowest index on
    ties) and explores the rounded-up child first. Rounding an LP point up is
    always feasible for a covering program, so every node also offers an
    incumbent. Reduced costs cap variables that cannot appear in an improving
    solution below the node.
    """
    start = time.perf_counter()
    n = len(inst.candidates)
    a, b = _rows(inst)
    c = inst.costs()
    stats = SolveStats(variable_count=n, constraint_count=len(inst.links))
    if b.size == 0:
        sol = make_solution(inst, [0] * n)
        stats.wall_time = time.perf_counter() - start
        return sol, stats

    best: np.ndarray | None = None
    best_val = math.inf
    stack = [(np.zeros(n), np.full(n, np.inf))]
    while stack:
        lo, hi = stack.pop()
        stats.nodes_explored += 1
        res = simplex_min(c, a, b, lo, hi)
        stats.lp_pivots += res.pivots
        if res.status != "optimal":
            continue
        bound = math.ceil(res.value - 1e-6)
        if bound >= best_val:
            continue
        x = res.x
        cand = _trim(np.ceil(x - 1e-6), a, b, c)
        cand_val = float(c @ cand)
        if cand_val < best_val:
            best, best_val = cand, cand_val
        frac = x - np.floor(x + 1e-6)
        frac[frac < 1e-6] = 0.0
        if not frac.any() or bound >= best_val:
            continue
        # improving solutions cost <= best_val - 1; each unit of N_j above
        # lo_j adds at least reduced[j]
        slack = best_val - 1 - res.value
        hi = hi.copy()
        red = res.reduced
        big = red > 1e-9
        cap = lo[big] + np.floor(slack / red[big] + 1e-9)
        hi[big] = np.minimum(hi[big], cap)
        dist = np.minimum(frac, 1.0 - frac)
        dist[frac == 0.0] = -1.0
        j = int(np.argmax(dist))
        down_hi = hi.copy()
        down_hi[j] = math.floor(x[j])
        up_lo = lo.copy()
        up_lo[j] = math.ceil(x[j])
        stack.append((lo, down_hi))
        if up_lo[j] <= hi[j]:
            stack.append((up_lo, hi))

    if best is None:
        raise InfeasibleInstance([l.key for l in inst.links if l.working > 0])
    sol = make_solution(inst, [int(round(v)) for v in best])
    stats.wall_time = time.perf_counter() - start
    return sol, stats


def _highs(inst: CoverInstance) -> tuple[Solution, SolveStats]:
    start = time.perf_counter()
    n = len(inst.candidates)
    a, b = _rows(inst)
    c = inst.costs()
    stats = SolveStats(variable_count=n, constraint_count=len(inst.links))
    if b.size == 0:
        sol = make_solution(inst, [0] * n)
        stats.wall_time = time.perf_counter() - start
        return sol, stats
    # objective is integral: a gap under half a unit proves optimality
    relax = simplex_min(c, a, b)
    if relax.status != "optimal":
        raise InfeasibleInstance([l.key for l in inst.links if l.working > 0])
    upper = float(c @ _trim(np.ceil(relax.x - 1e-6), a, b, c))
    res = milp(
        c,
        constraints=LinearConstraint(a, lb=b),
        integrality=np.ones(n),
        options={"mip_rel_gap": 0.5 / max(upper, 1.0), "disp": False},
    )
    if res.status != 0 or res.x is None:
        raise RuntimeError(f"MILP solve failed for {inst.name!r}: {res.message}")
    counts = np.round(res.x).astype(int)
    if np.any(a @ counts < b):
        raise RuntimeError(f"MILP returned an uncovered solution for {inst.name!r}")
    sol = make_solution(inst, counts)
    stats.nodes_explored = int(getattr(res, "mip_node_count", 0) or 0)
    stats.lp_pivots = relax.pivots
    stats.wall_time = time.perf_counter() - start
    return sol, stats


def solve(inst: CoverInstance, engine: str = DEFAULT_ENGINE) -> tuple[Solution, SolveStats]:
    """Optimal integer multiplicities for ``inst``.

    ``engine="highs"`` hands the covering program to the HiGHS MILP solver;
    ``engine="bnb"`` runs the in-house branch-and-bound, which is exact but
    only practical for instances of a few hundred candidates.
    """
    if engine == "highs":
        return _highs(inst)
    if engine == "bnb":
        return branch_and_bound(inst)
    raise ValueError(f"unknown engine {engine!r}; choose from {', '.join(ENGINES)}")


def brute_force_oracle(inst: CoverInstance, cap: int) -> Solution:
    """Exact optimum over multiplicities in ``[0, cap]`` by exhaustive search.

    Partial assignments are cut only by cost already spent and by coverage that
    can no longer be reached; no LP is involved.
    """
    n = len(inst.candidates)
    if n > ORACLE_MAX_CANDIDATES or cap > ORACLE_MAX_CAP:
        raise OracleTooLarge(f"oracle limited to {ORACLE_MAX_CANDIDATES} candidates and cap {ORACLE_MAX_CAP}")
    cov = [[int(cand.coverage.get(l.key, 0)) for l in inst.links] for cand in inst.candidates]
    need = [l.working for l in inst.links]
    costs = [cand.unit_cost for cand in inst.candidates]
    # reach[j][i]: most coverage candidates j.. can still add on link i
    reach = [[0] * len(need) for _ in range(n + 1)]
    for j in range(n - 1, -1, -1):
        reach[j] = [reach[j + 1][i] + cap * cov[j][i] for i in range(len(need))]

    best_cost = math.inf
    best: list[int] | None = None
    counts = [0] * n

    def walk(j: int, got: list[int], spent: int) -> None:
        nonlocal best_cost, best
        if spent >= best_cost:
            return
        if any(got[i] + reach[j][i] < need[i] for i in range(len(need))):
            return
        if j == n:
            best_cost, best = spent, counts.copy()
            return
        for k in range(cap + 1):
            counts[j] = k
            walk(j + 1, [got[i] + k * cov[j][i] for i in range(len(need))], spent + k * costs[j])
        counts[j] = 0

    walk(0, [0] * len(need), 0)
    if best is None:
        return Solution(multiplicities={}, spare={}, objective=-1, status="infeasible")
    return make_solution(inst, best)


def _term(coef: int, var: str, first: bool) -> str:
    if first:
        return f"{coef} {var}"
    return f"+ {coef} {var}" if coef >= 0 else f"- {-coef} {var}"


def export_lp(inst: CoverInstance) -> str:
    """CPLEX LP text for the instance; variables N1..Nn follow candidate order."""
    var = {c.id: f"N{j + 1}" for j, c in enumerate(inst.candidates)}
    out = [f"\\ p-cycle spare capacity cover: {inst.name}"]
    for c in inst.candidates:
        out.append(f"\\ {var[c.id]} = cycle {'-'.join(c.nodes)}")
    for i, l in enumerate(inst.links):
        out.append(f"\\ r{i + 1} = link {l.key[0]}-{l.key[1]}")
    out.append("Minimize")
    obj = [_term(c.unit_cost, var[c.id], k == 0) for k, c in enumerate(inst.candidates)]
    out.append(" obj: " + " ".join(obj))
    out.append("Subject To")
    for i, l in enumerate(inst.links):
        terms = [(c.coverage.get(l.key, 0), var[c.id]) for c in inst.candidates]
        terms = [t for t in terms if t[0]] or [(0, var[inst.candidates[0].id])]
        body = " ".join(_term(coef, v, k == 0) for k, (coef, v) in enumerate(terms))
        out.append(f" r{i + 1}: {body} >= {l.working}")
    out.append("Bounds")
    for c in inst.candidates:
        out.append(f" {var[c.id]} >= 0")
    out.append("General")
    out.append(" " + " ".join(var[c.id] for c in inst.candidates))
    out.append("End")
    return "\n".join(out) + "\n"


@dataclass
class SolvedSubgraph:
    """Solve output bundled with what produced it (for reports and workers)."""

    instance: CoverInstance
    solution: Solution
    stats: SolveStats
    extra: dict = field(default_factory=dict)


def solve_instance(inst: CoverInstance, engine: str = DEFAULT_ENGINE) -> SolvedSubgraph:
    sol, stats = solve(inst, engine)
    return SolvedSubgraph(inst, sol, stats)

"""Partition-count sweeps: solve every sub-graph, verify, and tabulate."""

from __future__ import annotations

import csv
import io
import json
import logging
import os
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

import networkx
import numpy
import scipy

from . import __version__
from .partitioner import PartitionState, SplitPolicy, iter_partitions, solver_cost
from .profiles import profile_for
from .protection import PlannedSubgraph, RestorationReport, verify_restorability
from .solver import (
    DEFAULT_ENGINE,
    CoverInstance,
    InfeasibleInstance,
    Solution,
    SolveStats,
    build_cover_instance,
    solve,
)
from .topology import Topology, emit_topology, topology_from_dict, topology_to_dict

log = logging.getLogger(__name__)

CSV_HEADER = ("partitions", "candidates", "spare_type1", "spare_type2", "time_sum_s", "time_max_s", "restorable")
SOLUTION_FORMAT = "subcycle-solution/1"


@dataclass(frozen=True)
class ReportRow:
    partitions: int
    candidates: int
    spare_type1: int | None
    spare_type2: int | None
    time_sum_s: float
    time_max_s: float
    restorable: bool


@dataclass
class ExperimentReport:
    topology: str
    rows: list[ReportRow] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    # per (partitions, policy): solution document
    solutions: dict[tuple[int, str], dict] = field(default_factory=dict)
    budget_ok: bool = True  # network-wide spare within the published network budget
    span_budget_ok: bool = True  # every span within total - working
    enumeration_time_s: float = 0.0
    workers: int = 1


@dataclass
class SolvedPart:
    """A solved sub-graph: what was solved, the answer, and how long it took."""

    topology: Topology
    instance: CoverInstance | None
    solution: Solution | None
    stats: SolveStats | None
    error: str | None = None

    @property
    def wall_time(self) -> float:
        return self.stats.wall_time if self.stats else 0.0


# ---------------------------------------------------------------------------
# solution documents


def solution_document(state: PartitionState, parts: Sequence[SolvedPart]) -> dict[str, Any]:
    subgraphs = []
    for sg, part in zip(state.subgraphs, parts):
        entry: dict[str, Any] = {
            "uid": sg.uid,
            "topology": topology_to_dict(part.topology),
            "candidates": sg.pcycle_count,
        }
        if part.solution is None:
            entry["error"] = part.error
            entry["cycles"] = []
        else:
            by_id = {c.id: c for c in part.instance.candidates}
            entry["cycles"] = [
                {"id": cid, "nodes": list(by_id[cid].nodes), "n": n}
                for cid, n in part.solution.used().items()
            ]
            entry["spare"] = [[k[0], k[1], s] for k, s in part.solution.spare.items() if s]
            entry["objective"] = part.solution.objective
            entry["stats"] = {
                "variables": part.stats.variable_count,
                "constraints": part.stats.constraint_count,
                "wall_time_s": part.stats.wall_time,
                "nodes_explored": part.stats.nodes_explored,
            }
        subgraphs.append(entry)
    solved = all(p.solution is not None for p in parts)
    return {
        "format": SOLUTION_FORMAT,
        "topology": state.original.name,
        "policy": state.policy.value,
        "partitions": state.partitions,
        "objective": sum(p.solution.objective for p in parts) if solved else None,
        "subgraphs": subgraphs,
    }


def plan_from_document(doc: dict[str, Any]) -> list[PlannedSubgraph]:
    if doc.get("format") != SOLUTION_FORMAT:
        raise ValueError(f"not a solution document (format {doc.get('format')!r})")
    plan = []
    for entry in doc["subgraphs"]:
        cycles = tuple((tuple(c["nodes"]), int(c["n"])) for c in entry["cycles"])
        plan.append(PlannedSubgraph(topology_from_dict(entry["topology"]), cycles))
    return plan


def plan_from_parts(parts: Sequence[SolvedPart]) -> list[PlannedSubgraph]:
    plan = []
    for p in parts:
        cycles: tuple = ()
        if p.solution is not None:
            by_id = {c.id: c for c in p.instance.candidates}
            cycles = tuple((by_id[cid].nodes, n) for cid, n in p.solution.used().items())
        plan.append(PlannedSubgraph(p.topology, cycles))
    return plan


# ---------------------------------------------------------------------------
# solving


def _solve_task(inst: CoverInstance, engine: str) -> tuple[Solution, SolveStats]:
    return solve(inst, engine)


class Orchestrator:
    """Builds instances, farms solves out to workers, and memoises by content.

    The same sub-graph with the same demand recurs across rows (only the
    bisected one changes per step) and across policies at p = 1; each distinct
    one is solved once and its recorded wall time is reused.
    """

    def __init__(self, engine: str = DEFAULT_ENGINE, max_hops: int | None = None, workers: int | None = None):
        self.engine = engine
        self.max_hops = max_hops
        self.workers = max(1, workers or os.cpu_count() or 1)
        self.enumeration_time = 0.0
        self._done: dict[str, tuple[CoverInstance | None, Solution | None, SolveStats | None, str | None]] = {}
        self._pool: ProcessPoolExecutor | None = None

    def __enter__(self) -> "Orchestrator":
        if self.workers > 1:
            self._pool = ProcessPoolExecutor(max_workers=self.workers)
        return self

    def __exit__(self, *exc: object) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def solve_all(self, topologies: Sequence[Topology]) -> list[SolvedPart]:
        keys = [emit_topology(g) for g in topologies]
        todo: dict[str, CoverInstance] = {}
        for key, g in zip(keys, topologies):
            if key in self._done or key in todo:
                continue
            start = time.perf_counter()
            try:
                todo[key] = build_cover_instance(g, max_hops=self.max_hops)
            except InfeasibleInstance as exc:
                self._done[key] = (None, None, None, str(exc))
            self.enumeration_time += time.perf_counter() - start
        if self._pool is not None and len(todo) > 1:
            futures = {k: self._pool.submit(_solve_task, inst, self.engine) for k, inst in todo.items()}
            results = {k: f.result() for k, f in futures.items()}
        else:
            results = {k: _solve_task(inst, self.engine) for k, inst in todo.items()}
        for k, inst in todo.items():
            sol, stats = results[k]
            self._done[k] = (inst, sol, stats, None)
        out = []
        for key, g in zip(keys, topologies):
            inst, sol, stats, err = self._done[key]
            out.append(SolvedPart(g, inst, sol, stats, err))
        return out


# ---------------------------------------------------------------------------
# experiment


def _policies(policies: Iterable[SplitPolicy | str]) -> list[SplitPolicy]:
    out = sorted({SplitPolicy(p) for p in policies}, key=lambda p: p.value)
    if not out:
        raise ValueError("at least one policy is required")
    return out


def run_experiment(
    t: Topology,
    max_partitions: int,
    policies: Iterable[SplitPolicy | str] = (SplitPolicy.TYPE1, SplitPolicy.TYPE2),
    workers: int | None = None,
    engine: str = DEFAULT_ENGINE,
    max_hops: int | None = None,
) -> ExperimentReport:
    """Sweep p = 1 .. max_partitions, solving and verifying every row.

    Timing columns follow Type II when it is swept, otherwise Type I; they
    count only the final per-sub-graph solves.
    """
    if max_partitions < 1:
        raise ValueError("max_partitions must be at least 1")
    chosen = _policies(policies)
    report = ExperimentReport(topology=t.name)
    bundled = profile_for(t) is not None

    with Orchestrator(engine, max_hops, workers) as orch:
        report.workers = orch.workers
        cost = _cached_side_cost(engine, max_hops)
        per_policy: dict[SplitPolicy, list[tuple[PartitionState, list[SolvedPart], RestorationReport]]] = {}
        for policy in chosen:
            rows = []
            for state in iter_partitions(t, max_partitions, policy, engine, max_hops, side_cost=cost):
                parts = orch.solve_all([sg.topology for sg in state.subgraphs])
                verdict = verify_restorability(t, plan_from_parts(parts))
                rows.append((state, parts, verdict))
                report.solutions[(state.partitions, policy.value)] = solution_document(state, parts)
            per_policy[policy] = rows
        report.enumeration_time_s = orch.enumeration_time

    depth = min(len(r) for r in per_policy.values())
    if depth < max_partitions:
        report.notes.append(
            f"partitioning exhausted: stopped at {depth} partition(s) of {max_partitions} requested"
        )
    timing = SplitPolicy.TYPE2 if SplitPolicy.TYPE2 in per_policy else chosen[0]
    for i in range(depth):
        spare: dict[SplitPolicy, int | None] = {}
        ok = True
        for policy, rows in per_policy.items():
            state, parts, verdict = rows[i]
            if any(p.solution is None for p in parts):
                bad = [p.error for p in parts if p.solution is None]
                report.notes.append(f"p={state.partitions} {policy.value}: infeasible sub-graph: {'; '.join(bad)}")
                spare[policy] = None
                ok = False
                continue
            spare[policy] = sum(p.solution.objective for p in parts)
            ok = ok and verdict.overall == 1.0
            total = verdict.total_spare
            if bundled and total > profile_for(t).max_spare:
                report.budget_ok = False
                report.notes.append(
                    f"p={state.partitions} {policy.value}: total spare {total} exceeds the "
                    f"network budget {profile_for(t).max_spare}"
                )
            if not verdict.budget_ok:
                report.span_budget_ok = False
                links = ", ".join(f"{u}-{v}" for u, v in verdict.budget_violations)
                report.notes.append(f"p={state.partitions} {policy.value}: spare over span budget on {links}")
        state, parts, _ = per_policy[timing][i]
        times = [p.wall_time for p in parts]
        report.rows.append(
            ReportRow(
                partitions=state.partitions,
                candidates=state.candidate_total,
                spare_type1=spare.get(SplitPolicy.TYPE1),
                spare_type2=spare.get(SplitPolicy.TYPE2),
                time_sum_s=sum(times),
                time_max_s=max(times),
                restorable=ok,
            )
        )
    return report


def _cached_side_cost(engine: str, max_hops: int | None):
    base = solver_cost(engine, max_hops)
    memo: dict[tuple[str, tuple], float] = {}

    def cost(g: Topology, working: dict) -> float:
        key = (emit_topology(g), tuple(sorted(working.items())))
        if key not in memo:
            memo[key] = base(g, working)
        return memo[key]

    return cost


# ---------------------------------------------------------------------------
# output


def _fmt(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        # shortest round-tripping decimal, never exponent notation
        return numpy.format_float_positional(v, trim="-")
    return str(v)


def emit_csv(r: ExperimentReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in r.rows:
        w.writerow([_fmt(getattr(row, col)) for col in CSV_HEADER])
    return buf.getvalue()


def parse_csv(text: str, topology: str = "") -> ExperimentReport:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ValueError(f"unexpected header {reader.fieldnames}")

    def opt_int(s: str) -> int | None:
        return int(s) if s else None

    rows = [
        ReportRow(
            partitions=int(d["partitions"]),
            candidates=int(d["candidates"]),
            spare_type1=opt_int(d["spare_type1"]),
            spare_type2=opt_int(d["spare_type2"]),
            time_sum_s=float(d["time_sum_s"]),
            time_max_s=float(d["time_max_s"]),
            restorable=d["restorable"] == "true",
        )
        for d in reader
    ]
    return ExperimentReport(topology=topology, rows=rows)


def emit_plot_data(r: ExperimentReport) -> dict[str, str]:
    """File name -> two-column ``p value`` series, one per metric."""
    series = {
        "candidates.dat": [(row.partitions, row.candidates) for row in r.rows],
        "time_sum.dat": [(row.partitions, row.time_sum_s) for row in r.rows],
        "time_max.dat": [(row.partitions, row.time_max_s) for row in r.rows],
    }
    for col in ("spare_type1", "spare_type2"):
        vals = [(row.partitions, getattr(row, col)) for row in r.rows]
        if any(v is not None for _, v in vals):
            series[f"{col}.dat"] = [(p, v) for p, v in vals if v is not None]
    return {name: "".join(f"{p} {_fmt(v)}\n" for p, v in pts) for name, pts in series.items()}


def manifest(r: ExperimentReport, seed: int | None, engine: str, max_hops: int | None) -> dict[str, Any]:
    return {
        "topology": r.topology,
        "seed": seed,
        "engine": engine,
        "max_hops": max_hops,
        "workers": r.workers,
        "enumeration_time_s": r.enumeration_time_s,
        "budget_ok": r.budget_ok,
        "span_budget_ok": r.span_budget_ok,
        "notes": r.notes,
        "versions": {
            "subcycle": __version__,
            "python": platform.python_version(),
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "networkx": networkx.__version__,
        },
    }


def write_experiment(
    r: ExperimentReport, out: Path, seed: int | None, engine: str, max_hops: int | None
) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(emit_csv(r), encoding="utf-8")
    for name, text in emit_plot_data(r).items():
        (out / name).write_text(text, encoding="utf-8")
    sol_dir = out / "solutions"
    sol_dir.mkdir(exist_ok=True)
    for (p, policy), doc in sorted(r.solutions.items()):
        (sol_dir / f"p{p:02d}_{policy}.json").write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    (out / "manifest.json").write_text(
        json.dumps(manifest(r, seed, engine, max_hops), indent=2) + "\n", encoding="utf-8"
    )


"""Command-line entry point: ``subcycle <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .cycles import EnumerationLimitError, enumerate_pcycles
from .harness import (
    Orchestrator,
    emit_csv,
    plan_from_document,
    plan_from_parts,
    run_experiment,
    solution_document,
    write_experiment,
)
from .partitioner import SplitPolicy, iter_partitions
from .profiles import BUNDLED, load_bundled, profile_for
from .protection import PlanError, render_report, verify_restorability
from .solver import DEFAULT_ENGINE, ENGINES, build_cover_instance, export_lp
from .topology import Topology, TopologyError, load_topology


def _load(ref: str, seed: int | None = None) -> Topology:
    """A topology file, or the name of a bundled profile."""
    path = Path(ref)
    if path.exists():
        return load_topology(path)
    if ref.lower() in BUNDLED:
        return load_bundled(ref.lower(), seed)
    raise TopologyError(f"no such file {ref!r} (bundled profiles: {', '.join(BUNDLED)})")


def _write(doc: Any, out: str | None) -> None:
    text = json.dumps(doc, indent=1) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _key(k: tuple[str, str]) -> list[str]:
    return [k[0], k[1]]


def cmd_enumerate(args: argparse.Namespace) -> int:
    t = _load(args.topology)
    cycles = enumerate_pcycles(t, max_hops=args.max_hops)
    doc = {
        "topology": t.name,
        "count": len(cycles),
        "cycles": [
            {
                "nodes": list(c.nodes),
                "oncycle": [_key(k) for k in sorted(c.oncycle)],
                "straddling": [_key(k) for k in sorted(c.straddling)],
            }
            for c in cycles
        ],
    }
    _write(doc, args.out)
    if args.out:
        print(f"{len(cycles)} candidate cycles written to {args.out}")
    return 0


def cmd_partition(args: argparse.Namespace) -> int:
    t = _load(args.topology)
    target = None if args.iterations is None else args.iterations + 1
    iterations = []
    for state in iter_partitions(t, target, SplitPolicy(args.policy), args.engine, args.max_hops):
        entry: dict[str, Any] = {
            "iteration": state.iteration,
            "candidates": state.candidate_total,
            "subgraphs": [
                {
                    "uid": sg.uid,
                    "nodes": list(sg.topology.nodes),
                    "spans": [_key(s.key) for s in sg.topology.spans],
                    "pcycles": sg.pcycle_count,
                }
                for sg in state.subgraphs
            ],
        }
        if state.history:
            rec = state.history[-1]
            entry["bisected"] = rec.parent
            entry["slider"] = [{"span": _key(sh.span), "k": sh.k, "w1": sh.w1, "w2": sh.w2} for sh in rec.shares]
        iterations.append(entry)
    _write({"topology": t.name, "policy": args.policy, "iterations": iterations}, args.out)
    if args.out:
        print(f"{len(iterations) - 1} bisection(s) written to {args.out}")
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    t = _load(args.topology)
    state = None
    for state in iter_partitions(t, args.partitions, SplitPolicy(args.policy), args.engine, args.max_hops):
        pass
    assert state is not None
    if state.partitions < args.partitions:
        print(f"note: partitioning exhausted at {state.partitions} partition(s)", file=sys.stderr)
    if args.lp_out:
        lp_dir = Path(args.lp_out)
        lp_dir.mkdir(parents=True, exist_ok=True)
        for sg in state.subgraphs:
            inst = build_cover_instance(sg.topology, max_hops=args.max_hops)
            (lp_dir / f"subgraph_{sg.uid}.lp").write_text(export_lp(inst), encoding="utf-8")
    with Orchestrator(args.engine, args.max_hops, args.workers) as orch:
        parts = orch.solve_all([sg.topology for sg in state.subgraphs])
    doc = solution_document(state, parts)
    _write(doc, args.out)
    verdict = verify_restorability(t, plan_from_parts(parts))
    print(
        f"{t.name}: {state.partitions} sub-graph(s), {state.candidate_total} candidates, "
        f"spare {doc['objective']}, restorable {verdict.overall:.4f}",
        file=sys.stderr,
    )
    return 0 if verdict.overall == 1.0 else 1


def cmd_verify(args: argparse.Namespace) -> int:
    t = _load(args.topology)
    doc = json.loads(Path(args.solution).read_text(encoding="utf-8"))
    try:
        report = verify_restorability(t, plan_from_document(doc))
    except (PlanError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(render_report(report))
    profile = profile_for(t)
    if profile is not None:
        print(f"network spare budget: {report.total_spare} / {profile.max_spare}")
    if args.report:
        out = {
            "topology": t.name,
            "overall": report.overall,
            "budget_ok": report.budget_ok,
            "budget_violations": [_key(k) for k in report.budget_violations],
            "total_spare": report.total_spare,
            "rows": [
                {"link": _key(r.link), "working": r.working, "provided": r.provided, "restorable": r.restorable}
                for r in report.rows
            ],
        }
        Path(args.report).write_text(json.dumps(out, indent=1) + "\n", encoding="utf-8")
    return 0 if report.overall == 1.0 else 1


def cmd_experiment(args: argparse.Namespace) -> int:
    t = _load(args.topology, args.seed)
    if args.seed is not None and profile_for(t) is None:
        print("note: --seed only regenerates bundled profiles; topology used as given", file=sys.stderr)
    policies = [SplitPolicy.TYPE1, SplitPolicy.TYPE2] if args.policy == "both" else [SplitPolicy(args.policy)]
    report = run_experiment(t, args.max_partitions, policies, args.workers, args.engine, args.max_hops)
    sys.stdout.write(emit_csv(report))
    for note in report.notes:
        print(f"note: {note}", file=sys.stderr)
    if args.out:
        write_experiment(report, Path(args.out), args.seed, args.engine, args.max_hops)
        print(f"results written to {args.out}", file=sys.stderr)
    ok = all(r.restorable for r in report.rows) and report.budget_ok
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="subcycle", description="p-cycle spare capacity planning with spectral sub-graphing")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, solver: bool = True) -> None:
        sp.add_argument("topology", help=f"topology file, or one of: {', '.join(BUNDLED)}")
        sp.add_argument("--max-hops", type=int, default=None, help="longest candidate cycle")
        if solver:
            sp.add_argument("--engine", choices=ENGINES, default=DEFAULT_ENGINE)

    sp = sub.add_parser("enumerate", help="list candidate p-cycles")
    common(sp, solver=False)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("partition", help="spectral sub-graphing trace")
    common(sp)
    sp.add_argument("--iterations", type=int, default=None, help="bisections to run (default: until exhausted)")
    sp.add_argument("--policy", choices=[x.value for x in SplitPolicy], default="type2")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_partition)

    sp = sub.add_parser("solve", help="partition and solve the spare capacity ILP")
    common(sp)
    sp.add_argument("--partitions", type=int, default=1)
    sp.add_argument("--policy", choices=[x.value for x in SplitPolicy], default="type2")
    sp.add_argument("--lp-out", help="directory for per-sub-graph LP files")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--out", help="solution document (default: stdout)")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("verify", help="check a solution document for restorability")
    sp.add_argument("topology", help=f"topology file, or one of: {', '.join(BUNDLED)}")
    sp.add_argument("solution")
    sp.add_argument("--report", help="write the structured report here")
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("experiment", help="sweep partition counts")
    common(sp)
    sp.add_argument("--max-partitions", type=int, required=True)
    sp.add_argument("--policy", choices=["type1", "type2", "both"], default="both")
    sp.add_argument("--seed", type=int, default=None, help="regenerate the bundled per-span capacities")
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_experiment)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (TopologyError, EnumerationLimitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

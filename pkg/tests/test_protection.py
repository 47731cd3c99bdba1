import numpy as np
import pytest

from conftest import TRIANGLE, make, random_protectable
from subcycle.harness import Orchestrator, plan_from_parts
from subcycle.partitioner import SplitPolicy, iter_partitions
from subcycle.profiles import load_bundled
from subcycle.protection import (
    NotProtected,
    PlanError,
    PlannedSubgraph,
    backup_paths,
    simulate_failures,
    spare_within_budget,
    verify_restorability,
)
from subcycle.topology import span_key

RING8 = ("a", "b", "c", "e", "d", "g", "f", "h")


def hops(path):
    return {span_key(a, b) for a, b in zip(path, path[1:])}


def test_ring8_on_cycle_failure():
    assert backup_paths(RING8, ("a", "h")) == [list("abcedgfh")]


def test_ring8_straddling_failure():
    paths = backup_paths(RING8, ("a", "d"))
    assert sorted(map("".join, paths)) == sorted(["ahfgd", "abced"])


def test_triangle_on_cycle():
    assert backup_paths(("a", "b", "c"), ("a", "b")) == [["a", "c", "b"]]


@pytest.mark.parametrize("failed", [("a", "d"), ("b", "g"), ("c", "h"), ("e", "f")])
def test_straddling_arcs_are_disjoint(failed):
    p, q = backup_paths(RING8, failed)
    assert not hops(p) & hops(q)
    assert span_key(*failed) not in hops(p) | hops(q)
    assert p[0] == q[0] == failed[0] and p[-1] == q[-1] == failed[1]


def test_unprotected_link():
    with pytest.raises(NotProtected, match="does not protect"):
        backup_paths(("a", "b", "c"), ("a", "z"))


def triangle_plan(t, n=1):
    return [PlannedSubgraph(t, ((("a", "b", "c"), n),))]


def test_triangle_restorable():
    t = make(TRIANGLE)
    rep = verify_restorability(t, triangle_plan(t))
    assert rep.overall == 1.0 and all(r.restorable for r in rep.rows)


def test_forcing_a_cycle_to_zero_is_flagged():
    t = make([("a", "b"), ("b", "c"), ("c", "a"), ("c", "d"), ("d", "a")])
    full = [PlannedSubgraph(t, ((("a", "b", "c"), 1), (("a", "c", "d"), 1)))]
    assert verify_restorability(t, full).overall == 1.0
    cut = [PlannedSubgraph(t, ((("a", "b", "c"), 0), (("a", "c", "d"), 1)))]
    rep = verify_restorability(t, cut)
    assert set(rep.unrestorable) == {("a", "b"), ("b", "c")}
    assert rep.overall == pytest.approx(3 / 5)


def test_structural_errors():
    t = make(TRIANGLE)
    with pytest.raises(PlanError, match="absent"):
        verify_restorability(t, [PlannedSubgraph(t, ((("a", "b", "z"), 1),))])
    other = make([("a", "b"), ("b", "x"), ("x", "a")])
    with pytest.raises(PlanError, match="unknown link"):
        verify_restorability(t, [PlannedSubgraph(other, ())])


def test_zero_headroom_span_flags_any_spare():
    t = make(TRIANGLE, headroom=0)
    ok, bad = spare_within_budget(t, triangle_plan(t))
    assert not ok and set(bad) == set(t.span_keys)
    assert spare_within_budget(t, triangle_plan(t, 0)) == (True, [])


def test_two_triangles_slider_sums_both_sides():
    # two triangles tied by two spans, each slider span carrying k = 2
    edges = [("a", "b"), ("b", "c"), ("c", "a"), ("d", "e"), ("e", "f"), ("f", "d"), ("c", "d"), ("b", "e")]
    t = make(edges, [1, 1, 1, 1, 1, 1, 2, 2])
    *_, state = iter_partitions(t, 2, SplitPolicy.TYPE2)
    assert state.partitions == 2
    with Orchestrator(workers=1) as orch:
        parts = orch.solve_all([sg.topology for sg in state.subgraphs])
    rep = verify_restorability(t, plan_from_parts(parts))
    assert rep.overall == 1.0
    rows = {r.link: r for r in rep.rows}
    for key in [("c", "d"), ("b", "e")]:
        owners = [w for _, w in state.owners()[key]]
        assert sum(owners) == 2
        assert rows[key].provided >= 2


@pytest.mark.parametrize("seed", range(20))
def test_exhaustive_failure_simulation(seed):
    t = random_protectable(np.random.default_rng(500 + seed), max_nodes=8, max_spans=13, max_w=4)
    for state in iter_partitions(t, 3, SplitPolicy.TYPE2):
        with Orchestrator(workers=1) as orch:
            parts = orch.solve_all([sg.topology for sg in state.subgraphs])
        plan = plan_from_parts(parts)
        rep = verify_restorability(t, plan)
        assert rep.overall == 1.0
        routes = simulate_failures(t, plan)
        for s in t.spans:
            assert routes[s.key] >= s.working, (state.partitions, s.key)


def test_net1_budget():
    t = load_bundled("net1")
    assert t.total_max_spare() == 580
    *_, state = iter_partitions(t, 1)
    with Orchestrator(workers=1) as orch:
        parts = orch.solve_all([sg.topology for sg in state.subgraphs])
    rep = verify_restorability(t, plan_from_parts(parts))
    assert rep.budget_ok and rep.total_spare <= 580

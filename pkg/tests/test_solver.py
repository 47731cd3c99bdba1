import numpy as np
import pytest
from scipy.optimize import Bounds, LinearConstraint, milp

from conftest import SQUARE_CHORD, TRIANGLE, make, random_protectable
from subcycle.solver import (
    InfeasibleInstance,
    OracleTooLarge,
    branch_and_bound,
    brute_force_oracle,
    build_cover_instance,
    export_lp,
    lp_relaxation,
    make_solution,
    solve,
)
from subcycle.profiles import load_bundled


def check_solution(inst, sol):
    a = inst.coverage_matrix()
    n = np.array([sol.multiplicities[c.id] for c in inst.candidates])
    assert np.all(a @ n >= inst.demand())
    assert sol.objective == int(inst.costs() @ n)
    assert sol.objective == sum(l.cost * sol.spare[l.key] for l in inst.links)


def test_triangle(triangle):
    inst = build_cover_instance(triangle)
    assert len(inst.candidates) == 1 and len(inst.links) == 3
    assert inst.candidates[0].unit_cost == 3
    sol, stats = solve(inst, "bnb")
    assert sol.multiplicities == {"p1": 1} and sol.objective == 3
    assert stats.variable_count == 1


def test_triangle_uneven_working():
    inst = build_cover_instance(make(TRIANGLE, [3, 1, 1]))
    for engine in ("bnb", "highs"):
        sol, _ = solve(inst, engine)
        assert sol.multiplicities == {"p1": 3} and sol.objective == 9


def test_square_chord(square_chord):
    inst = build_cover_instance(square_chord)
    assert len(inst.candidates) == 3
    sol, _ = solve(inst, "bnb")
    assert sol.objective == 4
    assert sol.used() == {"p3": 1}  # the quadrilateral
    assert brute_force_oracle(inst, 2).objective == 4


def test_bridge_is_infeasible():
    t = make([("a", "b"), ("b", "c"), ("c", "a"), ("c", "d")])
    with pytest.raises(InfeasibleInstance, match="c-d"):
        build_cover_instance(t)


def test_lp_relaxation_values(triangle):
    assert lp_relaxation(build_cover_instance(triangle)).value == pytest.approx(3.0)
    two = make([("a", "b"), ("b", "c"), ("c", "a"), ("d", "e"), ("e", "f"), ("f", "d")])
    inst = build_cover_instance(two)
    assert lp_relaxation(inst).value == pytest.approx(6.0)
    assert solve(inst, "bnb")[0].objective == 6


def reference_milp(inst):
    a = inst.coverage_matrix()
    res = milp(
        inst.costs(),
        constraints=LinearConstraint(a, lb=inst.demand(), ub=np.inf),
        integrality=np.ones(len(inst.candidates)),
        bounds=Bounds(0, np.inf),
    )
    return round(res.fun)


@pytest.mark.parametrize("seed", range(30))
def test_bnb_matches_scipy_milp(seed):
    t = random_protectable(np.random.default_rng(1000 + seed), max_nodes=7, max_spans=11, max_w=5)
    inst = build_cover_instance(t)
    sol, stats = branch_and_bound(inst)
    check_solution(inst, sol)
    assert sol.objective == reference_milp(inst)
    assert lp_relaxation(inst).value <= sol.objective + 1e-9
    assert stats.nodes_explored >= 1


def test_engines_agree_on_bundled():
    for name in ("net1", "nsfnet"):
        inst = build_cover_instance(load_bundled(name))
        a, _ = solve(inst, "highs")
        b, _ = solve(inst, "bnb")
        check_solution(inst, a)
        check_solution(inst, b)
        assert a.objective == b.objective


def test_oracle_limits():
    inst = build_cover_instance(load_bundled("net1"))
    with pytest.raises(OracleTooLarge):
        brute_force_oracle(inst, 2)


def test_oracle_reports_infeasible_box():
    inst = build_cover_instance(make(TRIANGLE, [3, 3, 3]))
    assert brute_force_oracle(inst, 2).status == "infeasible"


def test_unknown_engine(triangle):
    with pytest.raises(ValueError, match="unknown engine"):
        solve(build_cover_instance(triangle), "cplex")


def test_make_solution_spare():
    inst = build_cover_instance(make(SQUARE_CHORD))
    sol = make_solution(inst, [1, 0, 2])
    assert sol.spare[("a", "c")] == 1
    assert sol.spare[("a", "b")] == 3
    assert sol.objective == 3 + 2 * 4


def test_export_triangle(triangle):
    text = export_lp(build_cover_instance(triangle))
    assert "Minimize\n obj: 3 N1\n" in text
    assert text.count(": 1 N1 >= 1") == 3
    assert "General\n N1\nEnd\n" in text
    assert text == export_lp(build_cover_instance(triangle))


def test_export_square_chord(square_chord):
    text = export_lp(build_cover_instance(square_chord))
    body = text.split("Subject To\n")[1].split("Bounds")[0].splitlines()
    assert len(body) == 5
    chord = [ln for ln in body if ln.startswith(" r5:")][0]
    assert chord == " r5: 1 N1 + 1 N2 + 2 N3 >= 1"
    assert "N3 = cycle a-b-c-d" in text


def read_lp(text):
    """Tiny reader for the covering subset of the LP format: (c, A, b, names)."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("\\")]
    sec, c, rows, b, names = None, {}, [], [], []
    for ln in lines:
        if ln in ("Minimize", "Subject To", "Bounds", "General", "End"):
            sec = ln
            continue
        if sec == "Minimize":
            toks = ln.split(":", 1)[1].split()
        elif sec == "Subject To":
            lhs, rhs = ln.split(":", 1)[1].split(">=")
            toks = lhs.split()
            b.append(float(rhs))
        elif sec == "General":
            names = ln.split()
            continue
        else:
            continue
        coef, sign, terms = None, 1.0, {}
        for tok in toks:
            if tok in "+-":
                sign = -1.0 if tok == "-" else 1.0
            elif coef is None:
                coef = sign * float(tok)
            else:
                terms[tok] = terms.get(tok, 0.0) + coef
                coef, sign = None, 1.0
        if sec == "Minimize":
            c = terms
        else:
            rows.append(terms)
    a = np.array([[r.get(n, 0.0) for n in names] for r in rows])
    return np.array([c.get(n, 0.0) for n in names]), a, np.array(b), names


def test_export_reads_back_to_the_same_model():
    inst = build_cover_instance(load_bundled("net1"))
    c, a, b, names = read_lp(export_lp(inst))
    assert names == [f"N{j + 1}" for j in range(len(inst.candidates))]
    assert np.array_equal(c, inst.costs())
    assert np.array_equal(a, inst.coverage_matrix())
    assert np.array_equal(b, inst.demand())
    res = milp(c, constraints=LinearConstraint(a, lb=b, ub=np.inf), integrality=np.ones(len(c)))
    assert round(res.fun) == solve(inst)[0].objective

import numpy as np
import pytest
from scipy.optimize import linprog

from subcycle.lp import simplex_min


def random_cover(rng):
    m, n = int(rng.integers(1, 8)), int(rng.integers(1, 10))
    a = rng.integers(0, 3, size=(m, n)).astype(float)
    a[:, 0] = np.maximum(a[:, 0], 1)  # keeps it feasible
    b = rng.integers(0, 5, size=m).astype(float)
    c = rng.integers(1, 9, size=n).astype(float)
    return c, a, b


@pytest.mark.parametrize("seed", range(60))
def test_matches_scipy_linprog(seed):
    rng = np.random.default_rng(seed)
    c, a, b = random_cover(rng)
    n = c.size
    lo = rng.integers(0, 2, size=n).astype(float)
    hi = np.where(rng.random(n) < 0.3, lo + rng.integers(0, 3, size=n), np.inf)
    ref = linprog(c, A_ub=-a, b_ub=-b, bounds=list(zip(lo, [None if np.isinf(h) else h for h in hi])), method="highs")
    got = simplex_min(c, a, b, lo, hi)
    if ref.status == 2:
        assert got.status == "infeasible"
        return
    assert got.status == "optimal"
    assert got.value == pytest.approx(ref.fun, abs=1e-7)
    assert np.all(a @ got.x >= b - 1e-9)
    assert np.all(got.x >= lo - 1e-9) and np.all(got.x <= hi + 1e-9)


def test_triangle_cover():
    res = simplex_min(np.array([3.0]), np.ones((3, 1)), np.ones(3))
    assert res.value == pytest.approx(3.0)


def test_infeasible_bounds():
    res = simplex_min(np.array([1.0]), np.array([[1.0]]), np.array([5.0]), upper=np.array([2.0]))
    assert res.status == "infeasible"


def test_degenerate_instance_terminates():
    # many identical rows and zero right-hand sides invite cycling
    a = np.array([[1, 1, 0, 0], [0, 1, 1, 0], [0, 0, 1, 1], [1, 0, 0, 1]] * 5, dtype=float)
    b = np.array([1, 0, 1, 0] * 5, dtype=float)
    res = simplex_min(np.ones(4), a, b)
    ref = linprog(np.ones(4), A_ub=-a, b_ub=-b, method="highs")
    assert res.status == "optimal" and res.value == pytest.approx(ref.fun)

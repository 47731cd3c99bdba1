import itertools

import numpy as np
import pytest

from conftest import TWO_TRIANGLES, make
from subcycle.profiles import BUNDLED, load_bundled
from subcycle.spectral import BisectionError, EigenError, bisect, eigen_symmetric, split_subgraphs
from subcycle.topology import laplacian, validate


@pytest.mark.parametrize("seed", range(10))
def test_jacobi_matches_numpy(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 12))
    a = rng.normal(size=(n, n))
    m = a + a.T
    vals, vecs = eigen_symmetric(m)
    assert np.allclose(vals, np.linalg.eigvalsh(m), atol=1e-9)
    assert np.allclose(vecs.T @ vecs, np.eye(n), atol=1e-9)
    assert np.max(np.abs(m @ vecs - vecs * vals)) <= 1e-8


@pytest.mark.parametrize("name", BUNDLED)
def test_bundled_laplacian_residual(name):
    lap = laplacian(load_bundled(name))
    vals, vecs = eigen_symmetric(lap)
    assert np.max(np.abs(lap @ vecs - vecs * vals)) <= 1e-8
    assert abs(vals[0]) <= 1e-8


def test_path_spectrum():
    vals, _ = eigen_symmetric(laplacian(make([("a", "b"), ("b", "c")])))
    assert np.allclose(vals, [0.0, 1.0, 3.0], atol=1e-8)


def test_rejects_asymmetric():
    with pytest.raises(EigenError, match="symmetric"):
        eigen_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_two_triangles_bridge_is_the_slider():
    b = bisect(make(TWO_TRIANGLES))
    assert b.slider == (("c", "d"),)
    assert {b.v1, b.v2} == {frozenset("abc"), frozenset("def")}


def test_disconnected_rejected():
    t = make([("a", "b"), ("b", "c"), ("c", "a"), ("d", "e"), ("e", "f"), ("f", "d")])
    with pytest.raises(BisectionError, match="disconnected"):
        bisect(t)


def exhaustive_min_bisection(t):
    """Smallest cut over all splits into halves of equal size (or off by one)."""
    nodes = list(t.nodes)
    best = None
    for side in itertools.combinations(nodes, len(nodes) // 2):
        s = set(side)
        cut = sum(1 for sp in t.spans if (sp.u in s) != (sp.v in s))
        best = cut if best is None else min(best, cut)
    return best


@pytest.mark.parametrize(
    "edges",
    [
        # two K4 joined by one span
        [(a, b) for a, b in itertools.combinations("abcd", 2)]
        + [(a, b) for a, b in itertools.combinations("efgh", 2)]
        + [("d", "e")],
        # 6-ring
        [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "f"), ("f", "a")],
        # ladder
        [("a", "b"), ("b", "c"), ("c", "d"), ("e", "f"), ("f", "g"), ("g", "h"),
         ("a", "e"), ("b", "f"), ("c", "g"), ("d", "h")],
    ],
)
def test_slider_matches_exhaustive_min_bisection(edges):
    t = make(edges)
    b = bisect(t)
    assert abs(len(b.v1) - len(b.v2)) <= 1
    assert len(b.slider) == exhaustive_min_bisection(t)


@pytest.mark.parametrize("name", BUNDLED)
def test_fiedler_sign_split(name):
    t = load_bundled(name)
    b = bisect(t)
    assert b.v1 | b.v2 == set(t.nodes) and not b.v1 & b.v2
    assert all(b.fiedler[n] < 0 for n in b.v1)
    assert b.algebraic_connectivity > 0
    assert sum(b.fiedler.values()) == pytest.approx(0.0, abs=1e-8)
    cross = {s.key for s in t.spans if (s.u in b.v1) != (s.v in b.v1)}
    assert set(b.slider) == cross


@pytest.mark.parametrize("name", BUNDLED)
def test_split_halves_are_usable(name):
    t = load_bundled(name)
    b = bisect(t)
    pair = split_subgraphs(t, b)
    slider = set(b.slider)
    assert set(pair.shared) | set(pair.exclusive) == slider
    for i, g in enumerate(pair.halves):
        assert len(g.spans) < len(t.spans)
        assert validate(g).protectable
        for s in g.spans:
            parent = t.span(s.u, s.v)
            if s.key in pair.borrowed[i]:
                assert s.working == 0
            else:
                assert s.working == parent.working
    # every parent span lives in some half
    assert set(t.span_keys) <= set(pair.g1.span_keys) | set(pair.g2.span_keys)


C6 = [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "f"), ("f", "a")]


def test_c6_algebraic_connectivity():
    vals, vecs = eigen_symmetric(laplacian(make(C6)))
    assert vals[1] == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(vecs.T @ vecs, np.eye(6), atol=1e-8)
    assert np.allclose(np.abs(vecs[:, 0]), 1 / np.sqrt(6), atol=1e-9)


def test_c6_bisection():
    b = bisect(make(C6))
    assert len(b.slider) == 2 and len(b.v1) == len(b.v2) == 3


def test_single_span():
    b = bisect(make([("a", "b")]))
    assert {b.v1, b.v2} == {frozenset("a"), frozenset("b")}
    assert b.slider == (("a", "b"),)


def exhaustive_min_cut(t):
    nodes = list(t.nodes)
    best = None
    for r in range(1, len(nodes)):
        for side in itertools.combinations(nodes, r):
            s = set(side)
            cut = sum(1 for sp in t.spans if (sp.u in s) != (sp.v in s))
            best = cut if best is None else min(best, cut)
    return best


@pytest.mark.parametrize("seed", range(30))
def test_slider_within_factor_two_of_min_cut(seed):
    from conftest import random_protectable

    t = random_protectable(np.random.default_rng(2000 + seed), max_nodes=8, max_spans=14)
    assert len(bisect(t).slider) <= 2 * exhaustive_min_bisection(t)
    assert exhaustive_min_cut(t) <= len(bisect(t).slider)

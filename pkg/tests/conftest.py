from __future__ import annotations

import itertools

import networkx as nx
import numpy as np
import pytest

from subcycle.topology import Span, Topology


def make(edges, working=1, name="t", cost=1, headroom=10, nodes=None) -> Topology:
    """Topology from an edge list; ``working`` is a scalar or a per-edge list."""
    ws = [working] * len(edges) if isinstance(working, int) else list(working)
    if nodes is None:
        nodes = []
        for u, v in edges:
            for n in (u, v):
                if n not in nodes:
                    nodes.append(n)
    spans = [Span(u, v, working=w, cost=cost, total=w + headroom) for (u, v), w in zip(edges, ws)]
    return Topology(name=name, nodes=tuple(nodes), spans=tuple(spans))


TRIANGLE = [("a", "b"), ("b", "c"), ("c", "a")]
SQUARE_CHORD = [("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("a", "c")]
TWO_TRIANGLES = [("a", "b"), ("b", "c"), ("c", "a"), ("c", "d"), ("d", "e"), ("e", "f"), ("f", "d")]


def random_protectable(rng: np.random.Generator, max_nodes=6, max_spans=9, max_w=3, max_cycles=None):
    """Seeded random bridgeless connected graph with random working capacity."""
    while True:
        n = int(rng.integers(3, max_nodes + 1))
        names = [f"n{i}" for i in range(n)]
        pairs = list(itertools.combinations(names, 2))
        m = int(rng.integers(n, min(max_spans, len(pairs)) + 1))
        pick = [pairs[i] for i in rng.choice(len(pairs), size=m, replace=False)]
        g = nx.Graph(pick)
        if g.number_of_nodes() != n or not nx.is_connected(g) or nx.has_bridges(g):
            continue
        if max_cycles is not None and sum(1 for _ in nx.simple_cycles(g)) > max_cycles:
            continue
        ws = [int(rng.integers(0, max_w + 1)) for _ in pick]
        if not any(ws):
            ws[0] = 1
        return make(pick, ws, name="rand", nodes=names)


@pytest.fixture
def triangle():
    return make(TRIANGLE)


@pytest.fixture
def square_chord():
    return make(SQUARE_CHORD)


# acceptance criteria verdicts, printed once at the end of the run
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (ok, detail)
    assert ok, f"criterion {criterion} failed: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")

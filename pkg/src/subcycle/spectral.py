"""Spectral bisection of a (sub-)graph and construction of the two sub-graphs."""

from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .topology import Span, SpanKey, Topology, bridges, laplacian, span_key

JACOBI_TOL = 1e-10
JACOBI_MAX_SWEEPS = 100
ZERO_ENTRY = 1e-9
DISCONNECTED_GAP = 1e-8

# closure path weights: prefer spans already in the half, then fewer hops
_NEW_SPAN_WEIGHT = 1000
_OLD_SPAN_WEIGHT = 1


class EigenError(RuntimeError):
    pass


class BisectionError(ValueError):
    pass


class SplitRejected(ValueError):
    """The bisection cannot yield two usable sub-graphs."""


def _off_norm(a: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.square(a - np.diag(np.diag(a))))))


def eigen_symmetric(
    m: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigendecomposition of a real symmetric matrix.

    Returns ascending eigenvalues and a matrix whose columns are the matching
    orthonormal eigenvectors.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise EigenError("matrix must be square")
    if not np.allclose(a, a.T, atol=1e-12, rtol=0.0):
        raise EigenError("matrix is not symmetric")
    n = a.shape[0]
    v = np.eye(n)
    scale = max(1.0, float(np.linalg.norm(a)))
    for _ in range(max_sweeps):
        off = _off_norm(a)
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                tau = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(tau) > 1e150:
                    t = 1.0 / (2.0 * tau)
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        off = _off_norm(a)
        if off > tol * scale:
            raise EigenError(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3e})")
    vals = np.diag(a).copy()
    order = np.argsort(vals, kind="stable")
    return vals[order], v[:, order]


@dataclass(frozen=True)
class Bisection:
    v1: frozenset[str]
    v2: frozenset[str]
    slider: tuple[SpanKey, ...]
    fiedler: dict[str, float]
    algebraic_connectivity: float


def _orient(vec: np.ndarray) -> np.ndarray:
    # first clearly nonzero entry (declaration order) made negative
    for x in vec:
        if abs(x) >= ZERO_ENTRY:
            return -vec if x > 0 else vec
    return vec


def bisect(t: Topology) -> Bisection:
    """Split nodes by the sign of the Fiedler vector; zeros go to the second side."""
    if len(t.nodes) < 2:
        raise BisectionError("bisection needs at least 2 nodes")
    vals, vecs = eigen_symmetric(laplacian(t))
    lam2 = float(vals[1])
    if lam2 < DISCONNECTED_GAP:
        raise BisectionError(f"{t.name!r} is disconnected; use components instead")
    f = _orient(vecs[:, 1])
    fiedler = {n: float(x) for n, x in zip(t.nodes, f)}
    v1 = {n for n in t.nodes if fiedler[n] <= -ZERO_ENTRY}
    if not v1:
        v1 = {min(t.nodes, key=lambda n: fiedler[n])}
    v2 = set(t.nodes) - v1
    if not v2:
        v2 = {max(t.nodes, key=lambda n: fiedler[n])}
        v1 -= v2
    slider = tuple(s.key for s in t.spans if (s.u in v1) != (s.v in v1))
    return Bisection(frozenset(v1), frozenset(v2), slider, fiedler, lam2)


@dataclass(frozen=True)
class SubGraphPair:
    """Two overlapping halves of a bisected graph.

    Spans keep the parent's working capacity except ``borrowed`` ones, which
    carry zero working on that side: they only give the side a return path.
    ``shared`` slider spans sit in both halves and get their working split by
    the partitioner; ``exclusive`` maps the remaining slider spans to the only
    half (0 or 1) able to protect them.
    """

    g1: Topology
    g2: Topology
    shared: tuple[SpanKey, ...]
    exclusive: dict[SpanKey, int] = field(default_factory=dict)
    borrowed: tuple[frozenset[SpanKey], frozenset[SpanKey]] = (frozenset(), frozenset())

    @property
    def halves(self) -> tuple[Topology, Topology]:
        return (self.g1, self.g2)


def _graph(spans: list[Span]) -> nx.Graph:
    g = nx.Graph()
    g.add_edges_from((s.u, s.v) for s in spans)
    return g


def _close(parent: Topology, have: dict[SpanKey, Span], targets: set[SpanKey]) -> int:
    """Add cheapest return paths from ``parent`` until no target is a bridge.

    Mutates ``have``; returns the number of spans added.
    """
    pg = parent.to_networkx()
    added = 0
    while True:
        h = _graph(list(have.values()))
        loose = [k for k in have if k in targets and k in {span_key(u, v) for u, v in nx.bridges(h)}]
        if not loose:
            return added
        u, v = loose[0]
        pg.remove_edge(u, v)
        try:
            path = nx.dijkstra_path(
                pg,
                u,
                v,
                weight=lambda a, b, _d: _OLD_SPAN_WEIGHT if span_key(a, b) in have else _NEW_SPAN_WEIGHT,
            )
        except nx.NetworkXNoPath as exc:
            raise SplitRejected(f"span {u}-{v} cannot be closed into a cycle") from exc
        finally:
            pg.add_edge(u, v)
        for a, b in zip(path, path[1:]):
            k = span_key(a, b)
            if k not in have:
                have[k] = parent.span(a, b)
                added += 1


def split_subgraphs(t: Topology, b: Bisection) -> SubGraphPair:
    """Build the two halves of ``t`` for bisection ``b``.

    Each half is the induced graph on its side plus the slider spans. A slider
    span that is a bridge in one half but lies on a cycle in the other is left
    to the other half. A slider span that is a bridge in both halves, and any
    internal span that became a bridge, gets a return path borrowed from the
    rest of ``t``. Slider spans that are bridges of ``t`` itself stay in both.
    """
    if not b.slider:
        raise SplitRejected("empty slider: graph is not connected")
    slider = set(b.slider)
    parent_bridges = set(bridges(t))
    sides = (b.v1, b.v2)
    raw: list[dict[SpanKey, Span]] = []
    for side in sides:
        native = [s for s in t.spans if s.u in side and s.v in side]
        if len(side) > 1:
            h = _graph(native)
            h.add_nodes_from(side)
            if not nx.is_connected(h):
                raise SplitRejected("a side is disconnected after induction")
        have = {s.key: s for s in native}
        have.update({k: t.span(*k) for k in b.slider})
        raw.append(have)

    raw_bridges = [{span_key(u, v) for u, v in nx.bridges(_graph(list(h.values())))} for h in raw]
    targets: list[set[SpanKey]] = [
        {k for k in raw_bridges[i] if k not in slider and k not in parent_bridges} for i in (0, 1)
    ]
    for k in b.slider:
        if k in parent_bridges or not (k in raw_bridges[0] and k in raw_bridges[1]):
            continue
        trial = [dict(raw[i]) for i in (0, 1)]
        try:
            c1 = _close(t, trial[0], targets[0] | {k})
        except SplitRejected:
            c1 = None
        try:
            c2 = _close(t, trial[1], targets[1] | {k})
        except SplitRejected:
            c2 = None
        if c1 is None and c2 is None:
            raise SplitRejected(f"slider span {k} cannot be protected in either half")
        side = 0 if c2 is None or (c1 is not None and c1 <= c2) else 1
        targets[side].add(k)

    halves: list[dict[SpanKey, Span]] = []
    for i in (0, 1):
        have = dict(raw[i])
        _close(t, have, targets[i])
        loose = {span_key(u, v) for u, v in nx.bridges(_graph(list(have.values())))}
        for k in list(have):
            if k in slider and k in loose and k not in parent_bridges:
                del have[k]
        if not have:
            raise SplitRejected("a half keeps no spans")
        halves.append(have)

    shared = tuple(k for k in b.slider if k in halves[0] and k in halves[1])
    exclusive = {k: (0 if k in halves[0] else 1) for k in b.slider if k not in shared}
    borrowed = []
    for i, side in enumerate(sides):
        borrowed.append(
            frozenset(k for k in halves[i] if k not in slider and not (k[0] in side and k[1] in side))
        )
    g1, g2 = (
        t.subgraph(
            [t.span(*k) if k not in borrowed[i] else _zeroed(t.span(*k)) for k in halves[i]],
            name=f"{t.name}/{i + 1}",
        )
        for i in (0, 1)
    )
    return SubGraphPair(g1=g1, g2=g2, shared=shared, exclusive=exclusive, borrowed=(borrowed[0], borrowed[1]))


def _zeroed(s: Span) -> Span:
    return Span(s.u, s.v, working=0, cost=s.cost, total=s.total)

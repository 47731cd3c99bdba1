"""Dense two-phase primal simplex for small covering LPs.

Solves ``min c.x  s.t.  A x >= b,  lower <= x <= upper``. Pricing is
Dantzig's most-negative reduced cost; after a run of degenerate pivots it
switches to Bland's rule until the objective moves again, which rules out
cycling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

EPS = 1e-9
MAX_PIVOTS = 200_000
STALL_LIMIT = 50


class LPError(RuntimeError):
    pass


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible"
    x: np.ndarray | None
    value: float
    pivots: int
    reduced: np.ndarray | None = None


def _pivot(tab: np.ndarray, basis: list[int], row: int, col: int) -> None:
    tab[row] /= tab[row, col]
    col_vals = tab[:, col].copy()
    col_vals[row] = 0.0
    tab -= np.outer(col_vals, tab[row])
    basis[row] = col


def _run(tab: np.ndarray, basis: list[int], ncols: int, budget: int) -> int:
    """Iterate on the last row as reduced costs; returns the pivot count."""
    pivots = 0
    stall = 0
    m = len(basis)
    while True:
        red = tab[-1, :ncols]
        cand = np.flatnonzero(red < -EPS)
        if cand.size == 0:
            return pivots
        col = int(cand[0]) if stall >= STALL_LIMIT else int(cand[np.argmin(red[cand])])
        colv = tab[:m, col]
        pos = colv > EPS
        if not pos.any():
            raise LPError("unbounded LP")
        ratios = np.full(m, np.inf)
        ratios[pos] = tab[:m, -1][pos] / colv[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + EPS * max(1.0, abs(best)))
        row = int(min(ties, key=lambda r: basis[r]))
        stall = stall + 1 if best <= EPS else 0
        _pivot(tab, basis, row, col)
        pivots += 1
        if pivots > budget:
            raise LPError(f"simplex exceeded {budget} pivots")


def simplex_min(
    c: np.ndarray,
    a: np.ndarray,
    b: np.ndarray,
    lower: np.ndarray | None = None,
    upper: np.ndarray | None = None,
) -> LPResult:
    c = np.asarray(c, dtype=float)
    b = np.asarray(b, dtype=float)
    n = c.size
    if n == 0:
        ok = bool(np.all(b <= EPS))
        return LPResult("optimal" if ok else "infeasible", np.zeros(0) if ok else None,
                        0.0 if ok else np.inf, 0, np.zeros(0))
    a = np.asarray(a, dtype=float).reshape(-1, n)
    lo = np.zeros(n) if lower is None else np.asarray(lower, dtype=float)
    hi = np.full(n, np.inf) if upper is None else np.asarray(upper, dtype=float)
    if np.any(hi < lo - EPS):
        return LPResult("infeasible", None, np.inf, 0)
    fixed = hi <= lo + EPS
    if fixed.any():
        # fixed variables leave the tableau; their contribution moves to b
        free = ~fixed
        sub = simplex_min(c[free], a[:, free], b - a[:, fixed] @ lo[fixed], lo[free], hi[free])
        if sub.status != "optimal":
            return LPResult(sub.status, None, np.inf, sub.pivots)
        x = lo.copy()
        x[free] = sub.x
        reduced = np.zeros(n)
        reduced[free] = sub.reduced
        return LPResult("optimal", x, float(c @ x), sub.pivots, reduced)

    # shift x = lo + y
    rhs = b - a @ lo
    keep = ~((rhs <= EPS) & np.all(a >= 0, axis=1))
    a, rhs = a[keep], rhs[keep]
    bounded = np.flatnonzero(np.isfinite(hi))

    m_ge = a.shape[0]
    m = m_ge + bounded.size
    need_art = [i for i in range(m_ge) if rhs[i] > EPS]
    n_slack = m
    n_art = len(need_art)
    ncols = n + n_slack + n_art
    tab = np.zeros((m + 1, ncols + 1))
    basis: list[int] = [0] * m
    art_of = {r: n + n_slack + j for j, r in enumerate(need_art)}
    for i in range(m_ge):
        if i in art_of:
            tab[i, :n] = a[i]
            tab[i, n + i] = -1.0
            tab[i, art_of[i]] = 1.0
            tab[i, -1] = rhs[i]
            basis[i] = art_of[i]
        else:
            tab[i, :n] = -a[i]
            tab[i, n + i] = 1.0
            tab[i, -1] = -rhs[i]
            basis[i] = n + i
    for k, j in enumerate(bounded):
        i = m_ge + k
        tab[i, j] = 1.0
        tab[i, n + i] = 1.0
        tab[i, -1] = hi[j] - lo[j]
        basis[i] = n + i

    pivots = 0
    if n_art:
        # phase I: minimise the artificial sum
        tab[-1, :] = 0.0
        for r in need_art:
            tab[-1] -= tab[r]
        tab[-1, n + n_slack :ncols] = 0.0
        pivots += _run(tab, basis, ncols, MAX_PIVOTS)
        if -tab[-1, -1] > 1e-7 * max(1.0, float(np.abs(rhs).max(initial=0.0))):
            return LPResult("infeasible", None, np.inf, pivots)
        # drive degenerate artificials out of the basis
        for r in range(m):
            if basis[r] >= n + n_slack:
                row = tab[r, : n + n_slack]
                nz = np.flatnonzero(np.abs(row) > EPS)
                if nz.size:
                    _pivot(tab, basis, r, int(nz[0]))
        tab = np.delete(tab, np.s_[n + n_slack : ncols], axis=1)
        ncols = n + n_slack

    # phase II
    tab[-1, :] = 0.0
    tab[-1, :n] = c
    for r, j in enumerate(basis):
        if j < ncols and tab[-1, j] != 0.0:
            tab[-1] -= tab[-1, j] * tab[r]
    pivots += _run(tab, basis, ncols, MAX_PIVOTS)

    y = np.zeros(ncols)
    for r, j in enumerate(basis):
        if j < ncols:
            y[j] = tab[r, -1]
    x = lo + y[:n]
    return LPResult("optimal", x, float(c @ x), pivots, tab[-1, :n].copy())

"""Exact minimum-cost perfect matching on square matrices with forbidden cells.

``min_cost_matching`` is the shortest-augmenting-path Hungarian method with
row/column potentials, O(n^3).  Forbidden cells are absent edges, never big
numbers: they enter the reduced-cost scan as +inf and are never selected.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import Infeasible
from .model import ordered_sum

BRUTE_FORCE_MAX_N = 8


@dataclass(frozen=True, eq=False)
class MatchMatrix:
    cost: np.ndarray
    forbidden: Optional[np.ndarray] = None

    def __post_init__(self):
        cost = np.array(self.cost, dtype=np.float64)
        if cost.ndim != 2 or cost.shape[0] != cost.shape[1]:
            raise ValueError(f"cost must be square, got shape {cost.shape}")
        forb = (np.zeros(cost.shape, dtype=bool) if self.forbidden is None
                else np.array(self.forbidden, dtype=bool))
        if forb.shape != cost.shape:
            raise ValueError("forbidden mask must match the cost shape")
        ok = cost[~forb]
        if not np.all(np.isfinite(ok)) or np.any(ok < 0):
            raise ValueError("allowed costs must be finite and nonnegative")
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "forbidden", forb)

    @property
    def n(self) -> int:
        return self.cost.shape[0]


@dataclass(frozen=True, eq=False)
class MatchResult:
    perm: np.ndarray  # perm[j] = column matched to row j
    cost: float
    row_potential: np.ndarray
    col_potential: np.ndarray

    def __iter__(self):
        # allows ``perm, cost = min_cost_matching(m)``
        return iter((self.perm, self.cost))


def _as_match_matrix(m, forbidden=None) -> MatchMatrix:
    if isinstance(m, MatchMatrix):
        return m
    return MatchMatrix(m, forbidden)


def min_cost_matching(m, forbidden=None) -> MatchResult:
    """Minimum-cost perfect matching.

    Parameters
    ----------
    m : MatchMatrix or array_like
        Square cost matrix.  With a plain array, ``forbidden`` is an optional
        boolean mask of cells that may not be used.

    Returns
    -------
    MatchResult
        ``perm[j]`` is the column assigned to row j, ``cost`` the left-to-right
        sum of the selected entries, plus dual potentials u, v satisfying
        cost[j, k] - u[j] - v[k] >= 0 on allowed cells (up to rounding) with
        equality on the matching.

    Raises
    ------
    Infeasible
        If every perfect matching uses a forbidden cell.
    """
    m = _as_match_matrix(m, forbidden)
    n = m.n
    # 1-based internally; column 0 is the virtual root of each search.
    a = np.full((n + 1, n + 1), np.inf)
    a[1:, 1:] = np.where(m.forbidden, np.inf, m.cost)
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.int64)  # p[j]: row matched to column j
    way = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            cur = a[i0] - u[i0] - v
            upd = ~used & (cur < minv)
            minv[upd] = cur[upd]
            way[upd] = j0
            masked = np.where(used, np.inf, minv)
            j1 = int(np.argmin(masked))
            delta = masked[j1]
            if not np.isfinite(delta):
                raise Infeasible(f"no perfect matching avoids the forbidden cells (row {i - 1})")
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    perm = np.empty(n, dtype=np.int64)
    perm[p[1:] - 1] = np.arange(n)
    cost = ordered_sum(m.cost[j, perm[j]] for j in range(n))
    return MatchResult(perm, cost, u[1:].copy(), v[1:].copy())


def brute_force_matching(m, forbidden=None) -> MatchResult:
    """Exhaustive minimum over all n! permutations (n <= 8); a test oracle.

    Ties keep the lexicographically first permutation.  Potentials are not
    computed and come back as NaN.
    """
    m = _as_match_matrix(m, forbidden)
    n = m.n
    if n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force is limited to n <= {BRUTE_FORCE_MAX_N}, got {n}")
    cost, forb = m.cost, m.forbidden
    best, best_perm = np.inf, None
    for perm in itertools.permutations(range(n)):
        if any(forb[j, perm[j]] for j in range(n)):
            continue
        c = ordered_sum(cost[j, perm[j]] for j in range(n))
        if c < best:
            best, best_perm = c, perm
    if best_perm is None:
        raise Infeasible("no perfect matching avoids the forbidden cells")
    nan = np.full(n, np.nan)
    return MatchResult(np.array(best_perm, dtype=np.int64), best, nan, nan.copy())

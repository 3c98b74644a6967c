"""Exhaustive oracles for tiny instances and closed-form reference values."""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .matching import min_cost_matching
from .model import CostTensor, LatinAssignment, PlanarAssignment, ordered_sum

PLANAR_MAX_N = 5
AXIAL_MAX_N = 4
# absolute limits, whatever max_n a caller passes
PLANAR_HARD_CAP = 6
AXIAL_HARD_CAP = 5
HYBRID_HARD_CAP = 8


def _check_n(tensor, max_n, hard_cap, what):
    if tensor.d != 3:
        raise ValueError(f"{what} needs d=3, got d={tensor.d}")
    limit = min(max_n, hard_cap)
    if tensor.n > limit:
        raise ValueError(f"{what} enumeration is limited to n <= {limit}, got {tensor.n}")


@lru_cache(maxsize=None)
def _perms(n):
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)


def exact_planar(tensor: CostTensor, max_n: int = PLANAR_MAX_N) -> tuple[PlanarAssignment, float]:
    """Minimum over all (n!)^2 pairs (sigma, pi) of sum_i C[i, sigma(i), pi(i)].

    Sums run left to right over i; ties keep the lexicographically first pair.
    """
    _check_n(tensor, max_n, PLANAR_HARD_CAP, "exact_planar")
    n, c = tensor.n, tensor.array
    P = _perms(n)
    best, arg = np.inf, None
    for s in P:
        D = c[np.arange(n), s, :]
        tot = D[0, P[:, 0]].copy()
        for i in range(1, n):
            tot += D[i, P[:, i]]
        j = int(np.argmin(tot))
        if tot[j] < best:
            best, arg = float(tot[j]), (s, P[j])
    sigma, pi = arg
    return PlanarAssignment(n, sigma, pi), best


def exact_planar_by_matching(tensor: CostTensor, max_n: int = HYBRID_HARD_CAP) -> tuple[PlanarAssignment, float]:
    """Enumerate sigma, solve pi exactly as a matching on D[i, k] = C[i, sigma(i), k]."""
    _check_n(tensor, max_n, HYBRID_HARD_CAP, "exact_planar_by_matching")
    n, c = tensor.n, tensor.array
    best, arg = np.inf, None
    for s in _perms(n):
        res = min_cost_matching(c[np.arange(n), s, :])
        if res.cost < best:
            best, arg = res.cost, (s, res.perm)
    return PlanarAssignment(n, *arg), best


def latin_squares(n: int) -> np.ndarray:
    """All n x n Latin squares, shape (count, n, n), by row-wise backtracking."""
    return _latin_squares(n).copy()


@lru_cache(maxsize=None)
def _latin_squares(n):
    out = []
    grid = [[-1] * n for _ in range(n)]
    col_used = [[False] * n for _ in range(n)]
    row_used = [[False] * n for _ in range(n)]

    def place(cell):
        if cell == n * n:
            out.append([row[:] for row in grid])
            return
        i, j = divmod(cell, n)
        for v in range(n):
            if row_used[i][v] or col_used[j][v]:
                continue
            grid[i][j] = v
            row_used[i][v] = col_used[j][v] = True
            place(cell + 1)
            row_used[i][v] = col_used[j][v] = False
        grid[i][j] = -1

    place(0)
    return np.array(out, dtype=np.int64).reshape(-1, n, n)


def exact_axial(tensor: CostTensor, max_n: int = AXIAL_MAX_N) -> tuple[LatinAssignment, float]:
    _check_n(tensor, max_n, AXIAL_HARD_CAP, "exact_axial")
    n, c = tensor.n, tensor.array
    Ls = _latin_squares(n)
    # same order as LatinAssignment.cost, so comparisons with heuristics are exact
    tot = np.zeros(len(Ls))
    for i in range(n):
        row = np.zeros(len(Ls))
        for j in range(n):
            row += c[i, j, Ls[:, i, j]]
        tot += row
    best = int(np.argmin(tot))
    return LatinAssignment(Ls[best]), float(tot[best])


def planar_row_min_lower_bound(tensor: CostTensor) -> float:
    """Sum over the 1-planes of the smallest entry in each."""
    return ordered_sum(tensor.costs.reshape(tensor.n, -1).min(axis=1))


def parisi_value(n: int) -> float:
    """Expected optimal n x n assignment cost under Exp(1): sum_{i<=n} 1/i^2."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return math.fsum(1.0 / (i * i) for i in range(1, n + 1))

"""Sequential-matching heuristic for the 3-dimensional axial problem.

Slice i (1-plane i) is solved as a minimum-cost perfect matching over the
(j, k) pairs not used by slices 0..i-1.  The residual bipartite graph is
(n - i)-regular, so a perfect matching always exists, and the n matchings
partition the n^2 pairs: the output is a Latin square K[i][j] = k.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matching import min_cost_matching
from .model import CostTensor, LatinAssignment, ordered_sum


@dataclass(frozen=True)
class AxialRunReport:
    slice_costs: tuple  # Z_i for slices in order
    slice_bounds: tuple  # 2n / (n - i + 1) for 1-based i

    @property
    def total(self) -> float:
        return ordered_sum(self.slice_costs)


def dfm_slice_bound(i: int, n: int) -> float:
    """Expectation bound 2n/(n-i+1) on the cost of the 1-based i-th slice."""
    if not 1 <= i <= n:
        raise ValueError(f"slice index must be in 1..{n}, got {i}")
    return 2.0 * n / (n - i + 1)


def axial_greedy(tensor: CostTensor) -> tuple[LatinAssignment, AxialRunReport]:
    if tensor.d != 3:
        raise ValueError(f"axial greedy needs d=3, got d={tensor.d}")
    n = tensor.n
    c = tensor.array
    used = np.zeros((n, n), dtype=bool)
    K = np.empty((n, n), dtype=np.int64)
    costs = []
    rows = np.arange(n)
    for i in range(n):
        res = min_cost_matching(c[i], forbidden=used)
        K[i] = res.perm
        used[rows, res.perm] = True
        costs.append(res.cost)
    bounds = tuple(dfm_slice_bound(i, n) for i in range(1, n + 1))
    return LatinAssignment(K), AxialRunReport(tuple(costs), bounds)


def axial_lower_bound(tensor: CostTensor) -> float:
    """Sum over the n^(d-2) leading-coordinate slices of their 2-D optimum."""
    if tensor.d < 3:
        raise ValueError(f"axial lower bound needs d >= 3, got d={tensor.d}")
    n = tensor.n
    slabs = tensor.costs.reshape(-1, n, n)
    return ordered_sum(min_cost_matching(s).cost for s in slabs)

"""Alternating heuristic for the bilinear form of the 3-dimensional planar problem.

With y, z permutation matrices, sum_{i,j,k} C[i,j,k] y[i,j] z[i,k] is the cost of
the planar assignment {(i, y(i), z(i))}.  Fixing one block leaves a linear
program over the bipartite matching polytope, whose optimum sits at a vertex,
so each half-step is an exact assignment problem.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .matching import min_cost_matching
from .model import CostTensor, make_rng, ordered_sum


@dataclass(frozen=True)
class BilinearIterate:
    y: tuple
    z: tuple
    Z: float
    iteration: int


@dataclass(frozen=True)
class BilinearResult:
    final: BilinearIterate
    trace: tuple  # Z_0, Z_1, ...
    converged: bool  # False when max_iters stopped the loop


def _arr(C):
    a = C.array if isinstance(C, CostTensor) else np.asarray(C, dtype=np.float64)
    if a.ndim != 3:
        raise ValueError(f"expected a 3-dimensional cost array, got {a.ndim} dimensions")
    return a


def bilinear_objective(C, y, z) -> float:
    c = _arr(C)
    return ordered_sum(c[i, y[i], z[i]] for i in range(c.shape[0]))


def _best_response(D, incumbent, maximize):
    n = D.shape[0]
    if maximize:
        res = min_cost_matching(D.max() - D)
    else:
        res = min_cost_matching(D)
    perm = res.perm
    value = ordered_sum(D[i, perm[i]] for i in range(n))
    if incumbent is not None:
        inc = ordered_sum(D[i, incumbent[i]] for i in range(n))
        if (inc >= value) if maximize else (inc <= value):
            return tuple(int(v) for v in incumbent), inc
    return tuple(int(v) for v in perm), value


def solve_fixed_z(C, z, incumbent=None, maximize: bool = False):
    """Best y for fixed z: a matching on D[i, j] = C[i, j, z(i)].

    With ``incumbent`` given, it is returned whenever it ties the optimum.
    """
    c = _arr(C)
    n = c.shape[0]
    D = c[np.arange(n), :, np.asarray(z)]
    return _best_response(D, incumbent, maximize)


def solve_fixed_y(C, y, incumbent=None, maximize: bool = False):
    """Best z for fixed y: a matching on D[i, k] = C[i, y(i), k]."""
    c = _arr(C)
    n = c.shape[0]
    D = c[np.arange(n), np.asarray(y), :]
    return _best_response(D, incumbent, maximize)


def bilinear_alternate(C, y0=None, z0=None, max_iters: int = 50,
                       maximize: bool = False) -> BilinearResult:
    """Alternate exact block updates until the objective stops changing.

    Stops when Z_{i+1} == Z_i or the pair (y, z) repeats, or after
    ``max_iters`` iterations (``converged`` is then False).
    """
    n = _arr(C).shape[0]
    y = tuple(range(n)) if y0 is None else tuple(int(v) for v in y0)
    z = tuple(range(n)) if z0 is None else tuple(int(v) for v in z0)
    Z = bilinear_objective(C, y, z)
    trace = [Z]
    for it in range(1, max_iters + 1):
        y_new, _ = solve_fixed_z(C, z, incumbent=y, maximize=maximize)
        z_new, _ = solve_fixed_y(C, y_new, incumbent=z, maximize=maximize)
        Z_new = bilinear_objective(C, y_new, z_new)
        trace.append(Z_new)
        done = Z_new == Z or (y_new, z_new) == (y, z)
        y, z, Z = y_new, z_new, Z_new
        if done:
            return BilinearResult(BilinearIterate(y, z, Z, it), tuple(trace), True)
    return BilinearResult(BilinearIterate(y, z, Z, max_iters), tuple(trace), False)


def bilinear_restarts(C, restarts: int = 1, seed: int = 0, max_iters: int = 50,
                      maximize: bool = False) -> BilinearResult:
    """Best of an identity start plus ``restarts - 1`` random starting pairs."""
    n = _arr(C).shape[0]
    rng = make_rng(seed)
    best = bilinear_alternate(C, max_iters=max_iters, maximize=maximize)
    for _ in range(restarts - 1):
        res = bilinear_alternate(C, rng.permutation(n), rng.permutation(n), max_iters, maximize)
        better = res.final.Z > best.final.Z if maximize else res.final.Z < best.final.Z
        if better:
            best = res
    return best

"""Reference implementations that share no code with the package.

Used to derive expected values; everything here is deliberately naive.
"""
import itertools
import math
from fractions import Fraction

import numpy as np
from scipy.optimize import linear_sum_assignment


def parisi_exact(n):
    return sum(Fraction(1, i * i) for i in range(1, n + 1))


def harmonic(n):
    return sum(Fraction(1, i) for i in range(1, n + 1))


def scipy_matching_cost(a, forbidden=None):
    a = np.array(a, dtype=float)
    if forbidden is not None:
        a = np.where(forbidden, np.inf, a)
    r, c = linear_sum_assignment(a)
    return sum(float(a[i, j]) for i, j in zip(r, c))


def brute_matching_cost(a):
    n = len(a)
    return min(sum(a[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def brute_planar_cost(c):
    """Minimum over all sigma, pi by plain loops, summing in index order."""
    n = c.shape[0]
    best = math.inf
    for s in itertools.permutations(range(n)):
        for p in itertools.permutations(range(n)):
            tot = 0.0
            for i in range(n):
                tot += c[i, s[i], p[i]]
            best = min(best, tot)
    return best


def count_latin_squares(n):
    """Count n x n Latin squares by filtering all row-permutation tuples."""
    rows = list(itertools.permutations(range(n)))
    count = 0
    for sq in itertools.product(rows, repeat=n):
        if all(len({sq[i][j] for i in range(n)}) == n for j in range(n)):
            count += 1
    return count


def brute_axial_cost(c):
    n = c.shape[0]
    rows = list(itertools.permutations(range(n)))
    best = math.inf
    for sq in itertools.product(rows, repeat=n):
        if all(len({sq[i][j] for i in range(n)}) == n for j in range(n)):
            tot = 0.0
            for i in range(n):
                row = 0.0
                for j in range(n):
                    row += c[i, j, sq[i][j]]
                tot += row
            best = min(best, tot)
    return best


def planes_hit_once(triples, n):
    """Count, per (position, value), how many triples lie in that plane."""
    counts = np.zeros((3, n), dtype=int)
    for t in triples:
        for r in range(3):
            if not 0 <= t[r] < n:
                return False
            counts[r, t[r]] += 1
    return len(triples) == n and bool(np.all(counts == 1))


def lines_hit_once(K):
    K = np.asarray(K)
    n = K.shape[0]
    counts_row = np.zeros((n, n), dtype=int)  # (i, k)
    counts_col = np.zeros((n, n), dtype=int)  # (j, k)
    for i in range(n):
        for j in range(n):
            v = K[i, j]
            if not 0 <= v < n:
                return False
            counts_row[i, v] += 1
            counts_col[j, v] += 1
    return bool(np.all(counts_row == 1) and np.all(counts_col == 1))


def independent_exp_mean(size, seed):
    # a different generator family than the package uses
    rng = np.random.Generator(np.random.MT19937(seed))
    return float(rng.exponential(size=size).mean())

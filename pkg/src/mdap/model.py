"""Instances, solutions and feasibility checks.

Indices are 0-based everywhere.  A d-dimensional instance of side n is stored
as a flat float64 array in row-major order, so the entry (i1, ..., id) lives at
((i1*n + i2)*n + ...)*n + id.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CapacityError

#: Largest number of entries sample_tensor will allocate by default (400 MB).
DEFAULT_MAX_ENTRIES = 50_000_000

_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One round of the SplitMix64 finaliser on a 64-bit integer."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def mix_seed(master: int, *parts: int) -> int:
    """Derive a 64-bit child seed from a master seed and integer labels.

    ``mix_seed(m, a, b) == splitmix64(splitmix64(splitmix64(m) ^ a) ^ b)``,
    all arithmetic mod 2**64.  Benchmarks use ``mix_seed(master, n, trial)``;
    the function is part of the output format and must never change.
    """
    h = splitmix64(master & _MASK64)
    for p in parts:
        h = splitmix64(h ^ (p & _MASK64))
    return h


def make_rng(seed: int) -> np.random.Generator:
    """The package's only generator type: PCG64 seeded with a 64-bit integer."""
    return np.random.Generator(np.random.PCG64(seed & _MASK64))


def exp_variates(rng: np.random.Generator, size) -> np.ndarray:
    """Exp(1) draws by inverse CDF, -ln(1 - U)."""
    return -np.log1p(-rng.random(size))


def ordered_sum(values: Iterable[float]) -> float:
    """Left-to-right float sum; every solver reports costs through this."""
    total = 0.0
    for v in values:
        total += float(v)
    return total


@dataclass(frozen=True, eq=False)
class CostTensor:
    d: int
    n: int
    costs: np.ndarray
    seed: Optional[int] = None

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        costs = np.array(self.costs, dtype=np.float64).reshape(-1)
        if costs.size != self.n**self.d:
            raise ValueError(f"expected {self.n**self.d} costs, got {costs.size}")
        if not np.all(np.isfinite(costs)) or np.any(costs < 0):
            raise ValueError("costs must be finite and nonnegative")
        costs.flags.writeable = False
        object.__setattr__(self, "costs", costs)

    @classmethod
    def from_array(cls, array, seed=None) -> "CostTensor":
        a = np.asarray(array, dtype=np.float64)
        if len(set(a.shape)) != 1:
            raise ValueError(f"tensor must be hypercubic, got shape {a.shape}")
        return cls(d=a.ndim, n=a.shape[0], costs=a.reshape(-1), seed=seed)

    @property
    def array(self) -> np.ndarray:
        return self.costs.reshape((self.n,) * self.d)

    def flat_index(self, *coords: int) -> int:
        idx = 0
        for c in coords:
            idx = idx * self.n + c
        return idx

    def __eq__(self, other):
        if not isinstance(other, CostTensor):
            return NotImplemented
        return (self.d, self.n) == (other.d, other.n) and np.array_equal(
            self.costs.view(np.uint64), other.costs.view(np.uint64))


def sample_tensor(n: int, d: int = 3, seed: int = 0,
                  max_entries: int = DEFAULT_MAX_ENTRIES) -> CostTensor:
    """Draw an n^d tensor of i.i.d. Exp(1) costs.

    Uniforms come from PCG64(seed) in flat index order and are mapped through
    the inverse CDF, so (n, d, seed) fully determines the result.
    """
    if n < 1 or d < 2:
        raise ValueError(f"need n >= 1 and d >= 2, got n={n}, d={d}")
    size = n**d
    if size > max_entries:
        raise CapacityError(f"n^d = {size} exceeds the limit of {max_entries} entries")
    return CostTensor(d=d, n=n, costs=exp_variates(make_rng(seed), size), seed=seed)


def _is_perm(values: Sequence[int], n: int) -> bool:
    seen = [False] * n
    for v in values:
        v = int(v)
        if v < 0 or v >= n or seen[v]:
            return False
        seen[v] = True
    return len(values) == n


@dataclass(frozen=True)
class PlanarAssignment:
    """Triples (i, sigma[i], pi[i]) for i in range(n)."""

    n: int
    sigma: tuple
    pi: tuple

    def __post_init__(self):
        object.__setattr__(self, "sigma", tuple(int(v) for v in self.sigma))
        object.__setattr__(self, "pi", tuple(int(v) for v in self.pi))
        if not (_is_perm(self.sigma, self.n) and _is_perm(self.pi, self.n)):
            raise ValueError("sigma and pi must be permutations of range(n)")

    def triples(self) -> list[tuple[int, int, int]]:
        return [(i, self.sigma[i], self.pi[i]) for i in range(self.n)]

    def cost(self, tensor: CostTensor) -> float:
        c = tensor.array
        return ordered_sum(c[i, j, k] for i, j, k in self.triples())


@dataclass(frozen=True, eq=False)
class LatinAssignment:
    """Axial solution: K[i][j] = k for the triple (i, j, k)."""

    K: np.ndarray

    def __post_init__(self):
        K = np.array(self.K, dtype=np.int64)
        if not is_latin_assignment(K):
            raise ValueError("K is not a Latin square")
        K.flags.writeable = False
        object.__setattr__(self, "K", K)

    @property
    def n(self) -> int:
        return self.K.shape[0]

    def triples(self) -> list[tuple[int, int, int]]:
        n = self.n
        return [(i, j, int(self.K[i, j])) for i in range(n) for j in range(n)]

    def cost(self, tensor: CostTensor) -> float:
        """Slice totals summed over j, then summed over i (both left to right)."""
        c, n = tensor.array, self.n
        return ordered_sum(ordered_sum(c[i, j, self.K[i, j]] for j in range(n)) for i in range(n))

    def __eq__(self, other):
        return isinstance(other, LatinAssignment) and np.array_equal(self.K, other.K)


def is_planar_assignment(triples: Iterable[Sequence[int]], n: int) -> bool:
    """True iff the triples hit each of the 3n planes exactly once."""
    triples = [tuple(t) for t in triples]
    if len(triples) != n or any(len(t) != 3 for t in triples):
        return False
    return all(_is_perm([t[r] for t in triples], n) for r in range(3))


def is_latin_assignment(K) -> bool:
    """True iff every row and every column of the square K is a permutation."""
    K = np.asarray(K)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"K must be square, got shape {K.shape}")
    n = K.shape[0]
    return all(_is_perm(K[i], n) for i in range(n)) and all(
        _is_perm(K[:, j], n) for j in range(n))


@dataclass
class PartialState:
    """A partial planar assignment under construction.

    ``sigma[i]``/``pi[i]`` hold the 2nd/3rd coordinate of the triple in 1-plane
    i, or -1 when i is unmatched; ``owner2``/``owner3`` are the inverse maps.
    ``charge[i]`` is the cost charged when i's current triple was committed.
    """

    n: int
    sigma: np.ndarray = field(default=None)
    pi: np.ndarray = field(default=None)
    owner2: np.ndarray = field(default=None)
    owner3: np.ndarray = field(default=None)
    charge: np.ndarray = field(default=None)

    def __post_init__(self):
        for name in ("sigma", "pi", "owner2", "owner3"):
            if getattr(self, name) is None:
                setattr(self, name, np.full(self.n, -1, dtype=np.int64))
        if self.charge is None:
            self.charge = np.zeros(self.n)

    @property
    def matched(self) -> np.ndarray:
        return np.flatnonzero(self.sigma >= 0)

    @property
    def unmatched(self) -> np.ndarray:
        return np.flatnonzero(self.sigma < 0)

    @property
    def free2(self) -> np.ndarray:
        return np.flatnonzero(self.owner2 < 0)

    @property
    def free3(self) -> np.ndarray:
        return np.flatnonzero(self.owner3 < 0)

    @property
    def size(self) -> int:
        return int(np.count_nonzero(self.sigma >= 0))

    @property
    def triples(self) -> dict[int, tuple[int, int]]:
        return {int(i): (int(self.sigma[i]), int(self.pi[i])) for i in self.matched}

    def add(self, i: int, j: int, k: int, charge: float = 0.0) -> None:
        if self.sigma[i] >= 0 or self.owner2[j] >= 0 or self.owner3[k] >= 0:
            raise ValueError(f"triple ({i}, {j}, {k}) collides with the assignment")
        self.sigma[i], self.pi[i], self.charge[i] = j, k, charge
        self.owner2[j] = i
        self.owner3[k] = i

    def remove(self, i: int) -> tuple[int, int, int]:
        j, k = int(self.sigma[i]), int(self.pi[i])
        if j < 0:
            raise ValueError(f"1-plane {i} is not matched")
        self.owner2[j] = self.owner3[k] = -1
        self.sigma[i] = self.pi[i] = -1
        self.charge[i] = 0.0
        return i, j, k

    def check(self) -> None:
        """Raise AssertionError if the inverse maps disagree."""
        m = self.matched
        assert len(m) == self.n - len(self.free2) == self.n - len(self.free3)
        assert np.array_equal(self.owner2[self.sigma[m]], m)
        assert np.array_equal(self.owner3[self.pi[m]], m)

    def to_planar(self) -> PlanarAssignment:
        if self.size != self.n:
            raise ValueError(f"only {self.size} of {self.n} indices are matched")
        return PlanarAssignment(self.n, self.sigma.tolist(), self.pi.tolist())

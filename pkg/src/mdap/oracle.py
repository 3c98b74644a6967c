"""Cost oracles for the 3-dimensional planar heuristics.

Two interchangeable back ends:

``RefreshableCosts``
    Costs are revealed lazily under the Exp(1) model.  Each entry is either
    exposed with a known value, or hidden with a known lower bound.  A query
    at threshold w samples a hidden entry conditionally (memorylessness), and
    ``refresh(w)`` turns the array into a fresh i.i.d. array C' with
    C <= C' + w.  The accumulated offset ``offset`` is what has to be added to
    a refreshed value to bound the original cost.

``FixedCosts``
    A concrete tensor.  ``refresh`` only moves the offset, so a query at
    threshold w accepts entries whose actual cost is at most offset + w.

Both report *relative* values (value - offset for the fixed oracle) from
``query`` and the cost to book for a committed entry from ``charge``.
"""
from __future__ import annotations

from typing import NamedTuple, Optional

import numpy as np

from .errors import CapacityError
from .model import DEFAULT_MAX_ENTRIES, CostTensor, exp_variates, make_rng


class EntryState(NamedTuple):
    exposed: bool
    value: float  # exposed value, or the lower bound of a hidden entry


class RefreshableCosts:
    """Lazily revealed n x n x n Exp(1) costs with memoryless refresh.

    State is two dense arrays (value and an exposed flag).  Untouched entries
    are hidden with bound 0 and cost nothing until queried.  Refreshes are
    buffered and applied on the next access; consecutive refreshes by a and b
    act like one refresh by a + b (the rule composes), so buffering does not
    change the law of any response.
    """

    def __init__(self, n: int, seed: int = 0, max_entries: int = DEFAULT_MAX_ENTRIES):
        if n < 1:
            raise ValueError(f"n must be >= 1, got {n}")
        if n**3 > max_entries:
            raise CapacityError(f"n^3 = {n**3} exceeds the limit of {max_entries} entries")
        self.n = n
        self.seed = seed
        self._rng = make_rng(seed)
        self._val = np.zeros(n**3)
        self._exposed = np.zeros(n**3, dtype=bool)
        self._pending = 0.0
        self.offset = 0.0
        self.samples_drawn = 0

    @property
    def size(self) -> int:
        return self._val.size

    def _flush(self):
        w = self._pending
        if w == 0.0:
            return
        self._pending = 0.0
        val, exp = self._val, self._exposed
        val -= w
        exp &= val > 0.0
        np.maximum(val, 0.0, out=val)

    def refresh(self, w: float) -> None:
        if not w >= 0.0 or not np.isfinite(w):
            raise ValueError(f"refresh amount must be finite and >= 0, got {w}")
        self._pending += w
        self.offset += w

    def query(self, idx, w: float) -> np.ndarray:
        """Exposed values of the entries ``idx``; +inf marks "above w".

        Exposed entries report their value whatever w is, so callers compare
        against their budget.  Hidden entries whose bound is below w are
        resolved by drawing bound + Exp(1); a draw above w leaves the entry
        hidden with bound w.  Draws happen in ascending flat-index order of the
        entries needing one.
        """
        self._flush()
        idx = np.asarray(idx, dtype=np.int64)
        val, exp = self._val, self._exposed
        cur = val[idx]
        is_exp = exp[idx]
        need = ~is_exp & (cur < w)
        if need.any():
            todo = np.unique(idx[need])
            draw = val[todo] + exp_variates(self._rng, todo.size)
            self.samples_drawn += todo.size
            hit = draw <= w
            val[todo] = np.where(hit, draw, w)
            exp[todo] = hit
            cur = val[idx]
            is_exp = exp[idx]
        return np.where(is_exp, cur, np.inf)

    def query_one(self, e: int, w: float) -> Optional[float]:
        """Single-entry query: the exposed value, or None if above threshold."""
        if not 0 <= e < self.size:
            raise IndexError(f"entry {e} out of range")
        v = self.query(np.array([e]), w)[0]
        return None if np.isinf(v) else float(v)

    def charge(self, idx) -> np.ndarray:
        """Upper bound on the original cost of exposed entries: value + offset."""
        self._flush()
        idx = np.asarray(idx, dtype=np.int64)
        if not self._exposed[idx].all():
            raise ValueError("only exposed entries can be charged")
        return self._val[idx] + self.offset

    def state(self, e: int) -> EntryState:
        if not 0 <= e < self.size:
            raise IndexError(f"entry {e} out of range")
        self._flush()
        return EntryState(bool(self._exposed[e]), float(self._val[e]))

    def set_state(self, e: int, exposed: bool, value: float) -> None:
        if not 0 <= e < self.size:
            raise IndexError(f"entry {e} out of range")
        if not (value >= 0 and np.isfinite(value)):
            raise ValueError("entry values must be finite and nonnegative")
        self._flush()
        self._exposed[e] = exposed
        self._val[e] = value


class FixedCosts:
    """Oracle over a concrete 3-dimensional tensor (fixed-instance mode)."""

    def __init__(self, tensor: CostTensor):
        if tensor.d != 3:
            raise ValueError(f"expected a 3-dimensional tensor, got d={tensor.d}")
        self.tensor = tensor
        self.n = tensor.n
        self._c = tensor.costs
        self.offset = 0.0

    @property
    def size(self) -> int:
        return self._c.size

    def refresh(self, w: float) -> None:
        if not w >= 0.0 or not np.isfinite(w):
            raise ValueError(f"refresh amount must be finite and >= 0, got {w}")
        self.offset += w

    def query(self, idx, w: float) -> np.ndarray:
        # every entry is known: report it relative to the offset
        return self._c[np.asarray(idx, dtype=np.int64)] - self.offset

    def query_one(self, e: int, w: float) -> Optional[float]:
        if not 0 <= e < self.size:
            raise IndexError(f"entry {e} out of range")
        v = self.query(np.array([e]), w)[0]
        return None if np.isinf(v) else float(v)

    def charge(self, idx) -> np.ndarray:
        return self._c[np.asarray(idx, dtype=np.int64)].copy()


def oracle_query(rc, e: int, w: float) -> Optional[float]:
    """Query one entry at threshold w; None means the entry exceeds w."""
    return rc.query_one(e, w)

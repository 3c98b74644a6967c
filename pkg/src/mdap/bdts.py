"""Bounded depth tree search, BDTS(k), for the 3-dimensional planar problem.

The heuristic runs in three phases over a cost oracle (see ``mdap.oracle``):

* Greedy Phase: 1-planes 0..n1-1 take the cheapest triple still available.
* Main Phase: rounds t = 1..t0.  Each round refreshes the oracle by w[t-1] and
  adds unmatched 1-planes one at a time through an alternating-path tree whose
  added triples cost at most w[t].  Trees are found bottom-up through candidate
  pools.
* Final Phase: the last fewer-than-2**k indices are added by a top-down tree
  search that only needs one free 2-coordinate and one free 3-coordinate.

Level convention: BDTS(k) uses theta = 1/(2**(k+1) - 1), and its trees add
2**(k+1) - 1 triples.  The "two level" variant with theta = 1/7 and 7 added
triples per step is k = 2 here.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .errors import Exhausted, ScheduleError
from .model import CostTensor, PartialState, PlanarAssignment, ordered_sum
from .oracle import FixedCosts, RefreshableCosts

log = logging.getLogger(__name__)

DEFAULT_POOLS_CAP = 64
# DFS steps allowed per tree extraction before reporting "not found"
SEARCH_STEP_LIMIT = 20_000


@dataclass(frozen=True)
class RetryPolicy:
    """What to do when no feasible tree exists under the current budget."""

    max_escalations: int = 8  # per index
    factor: float = 2.0
    pools_cap: int = DEFAULT_POOLS_CAP
    final_constant: float = 2.0  # K in the Final Phase refresh amount


@dataclass(frozen=True)
class BdtsSchedule:
    """Parameters of BDTS(k) for side n.

    ``x[t]`` is the (real) target number of unmatched 1-planes at the start of
    round t for t = 1..t0+1, with x[0] = n; ``targets`` holds the rounded
    values actually used.  ``w[0]`` is the Greedy Phase threshold w0, ``w[t]``
    the round-t budget and ``W[t] = w[0] + ... + w[t]``.
    """

    n: int
    k: int
    theta: float
    n1: int
    alpha: float
    beta: float
    L: float
    t0: int
    x: tuple
    targets: tuple
    w: tuple
    W: tuple
    final_w: float

    @property
    def w0(self) -> float:
        return self.w[0]

    @property
    def x1(self) -> int:
        return self.n - self.n1


def make_schedule(n: int, k: int, L: float = 1.0, final_constant: float = 2.0) -> BdtsSchedule:
    if n < 4:
        raise ScheduleError(f"BDTS needs n >= 4, got {n}")
    if k < 1:
        raise ScheduleError(f"k must be >= 1, got {k}")
    if L <= 0:
        raise ScheduleError(f"L must be positive, got {L}")
    m = 2 ** (k + 1) - 1
    theta = 1.0 / m
    one_minus = (m - 1) / m
    tail = n**one_minus
    if tail < 2:
        raise ScheduleError(f"k={k} is too large for n={n}: n^(1-theta) = {tail:.3f} < 2")
    n1 = int(round(n - tail))
    x1 = n - n1
    alpha = 2.0 ** (-2 * k - 2) * (1.0 - math.sqrt(2.0 / 3.0))
    beta = 1.0 - alpha
    t0 = max(0, math.ceil(math.log(x1 / L) / math.log(1.0 / beta))) if x1 > L else 0
    logn = math.log(n)
    x = [float(n)] + [beta ** (t - 1) * x1 for t in range(1, t0 + 2)]
    targets = tuple(max(1, int(round(v))) for v in x)
    w0 = 2.0 * n ** (-2 * (m - 1) / m) * logn
    w = [w0] + [2.0 * x[t] ** (-1.0 - theta) * n ** (theta - 1.0) * logn**theta
                for t in range(1, t0 + 2)]
    W, acc = [], 0.0
    for v in w:
        acc += v
        W.append(acc)
    final_w = final_constant * logn**theta / n**one_minus
    return BdtsSchedule(n, k, theta, n1, alpha, beta, L, t0, tuple(x), targets,
                        tuple(w), tuple(W), final_w)


@dataclass
class AltTree:
    """Alternating-path tree: ``levels[2m]`` are added, ``levels[2m+1]`` removed.

    Triples within a level are in position order.  ``budget`` is the threshold
    every added triple was checked against.
    """

    levels: list
    budget: float

    @property
    def root(self) -> tuple:
        return self.levels[0][0]

    @property
    def added(self) -> list:
        return [t for lv in self.levels[0::2] for t in lv]

    @property
    def removed(self) -> list:
        return [t for lv in self.levels[1::2] for t in lv]


@dataclass
class RoundStat:
    t: int
    budget: float
    added: int
    escalations: int


@dataclass
class BdtsReport:
    n: int
    k: int
    mode: str
    greedy_cost: float = 0.0
    main_cost: float = 0.0
    final_cost: float = 0.0
    assignment_cost: float = 0.0  # charges of the triples in the output assignment
    escalations: int = 0
    greedy_escalations: int = 0
    trees: int = 0
    rounds: list = field(default_factory=list)
    # ("add" | "remove", phase, i, j, k, charge); replays to the final state
    trace: list = field(default_factory=list)
    offset: float = 0.0

    @property
    def cost_upper(self) -> float:
        """Sum of the charges of every triple ever added (all phases)."""
        return self.greedy_cost + self.main_cost + self.final_cost

    @property
    def cost(self) -> float:
        """Reported cost: exact in fixed mode, the cumulative bound otherwise."""
        return self.assignment_cost if self.mode == "fixed" else self.cost_upper


def _flat(n, i, j, k):
    return (i * n + j) * n + k


def _oracle_n(oracle) -> int:
    return oracle.n


def greedy_phase(oracle, sched: BdtsSchedule, report: Optional[BdtsReport] = None) -> PartialState:
    """Give 1-planes 0..n1-1, in order, the cheapest triple over the free J x K.

    The minimum is located by querying at threshold w0 and doubling until some
    value is exposed below the threshold; every unexposed entry is then known
    to lie above it.
    """
    n = _oracle_n(oracle)
    state = PartialState(n)
    z1 = []
    for i in range(sched.n1):
        J, K = state.free2, state.free3
        idx = (i * n + J[:, None]) * n + K[None, :]
        w = sched.w0
        while True:
            vals = oracle.query(idx, w)
            vals = np.where(vals <= w, vals, np.inf)
            pos = int(np.argmin(vals))
            if np.isfinite(vals.flat[pos]):
                break
            w *= 2.0
            if report is not None:
                report.greedy_escalations += 1
        a, b = divmod(pos, len(K))
        j, k = int(J[a]), int(K[b])
        c = float(oracle.charge([_flat(n, i, j, k)])[0])
        state.add(i, j, k, c)
        z1.append(c)
        if report is not None:
            report.trace.append(("add", "greedy", i, j, k, c))
    if report is not None:
        report.greedy_cost = ordered_sum(z1)
    return state


def _pool_caps(w, n, x, k, pools_cap, available):
    """Pool size per tree level m = 1..k (key m), from nu_0 = w n x^2 / 2 and
    nu_{l+1} = w n nu_l^2 / 2 with l = k - m, capped at ``pools_cap``.

    When the deeper levels (m >= 2) would not leave room for level 1 they are
    shrunk proportionally; level 1 is filled last and takes what remains.
    """
    nu = [w * n * x * x / 2.0]
    for _ in range(1, k):
        nu.append(min(w * n * nu[-1] ** 2 / 2.0, 1e18))
    caps = {m: max(1, min(pools_cap, math.ceil(nu[k - m]))) for m in range(1, k + 1)}
    demand = sum(2**m * caps[m] for m in caps)
    if demand > available and k > 1:
        f = available / demand
        caps.update({m: max(1, int(caps[m] * f)) for m in range(2, k + 1)})
    return caps


def _distribute(useful, cap):
    """Assign candidates (rows of the boolean ``useful``, one column per
    position) to positions: each goes to the least-filled position it is
    useful for.  Returns per-position lists of row indices."""
    npos = useful.shape[1]
    pools = [[] for _ in range(npos)]
    for row in np.flatnonzero(useful.any(axis=1)):
        best = None
        for r in np.flatnonzero(useful[row]):
            if len(pools[r]) < cap and (best is None or len(pools[r]) < len(pools[best])):
                best = r
        if best is not None:
            pools[best].append(row)
    return pools


def find_tree(state: PartialState, i: int, w: float, k: int, oracle,
              pools_cap: int = DEFAULT_POOLS_CAP) -> Optional[AltTree]:
    """Find a feasible alternating-path tree adding 1-plane ``i``.

    Pools are built bottom-up, from the leaf level (whose triples use free 2-
    and 3-coordinates) to the root; pools are pairwise disjoint across the
    whole tree, so inner nodes never clash.  A tree is then extracted top-down
    with backtracking over witnesses, keeping leaf coordinates distinct.
    Returns None when no tree is found under budget ``w``.
    """
    n = state.n
    X2, X3 = state.free2, state.free3
    x = len(X2)
    if x < 2**k or state.sigma[i] >= 0:
        return None
    avail = state.sigma >= 0
    if avail.sum() < 2 ** (k + 1) - 2:
        return None
    caps = _pool_caps(w, n, x, k, pools_cap, int(avail.sum()))
    sigma, pi, owner2, owner3 = state.sigma, state.pi, state.owner2, state.owner3

    pools = {}  # (m, r) -> array of 1-coords
    wit = {}  # (m, r) -> {p: [(a, b), ...]} sorted by value

    # leaf level
    cand = np.flatnonzero(avail)
    vals = oracle.query((cand[:, None, None] * n + X2[None, :, None]) * n + X3[None, None, :], w)
    good = vals <= w
    useful = np.repeat(good.any(axis=(1, 2))[:, None], 2**k, axis=1)
    for r, rows in enumerate(_distribute(useful, caps[k])):
        members = cand[rows]
        pools[(k, r)] = members
        avail[members] = False
        wit[(k, r)] = {int(cand[row]): _witness_list(vals[row], good[row], X2, X3) for row in rows}

    # inner levels, bottom-up
    for m in range(k - 1, 0, -1):
        cand = np.flatnonzero(avail)
        npos = 2**m
        useful = np.zeros((len(cand), npos), dtype=bool)
        level_vals = []
        for r in range(npos):
            A = sigma[pools[(m + 1, 2 * r)]]
            B = pi[pools[(m + 1, 2 * r + 1)]]
            if len(A) == 0 or len(B) == 0 or len(cand) == 0:
                level_vals.append(None)
                continue
            v = oracle.query((cand[:, None, None] * n + A[None, :, None]) * n + B[None, None, :], w)
            useful[:, r] = (v <= w).any(axis=(1, 2))
            level_vals.append((v, A, B))
        for r, rows in enumerate(_distribute(useful, caps[m])):
            members = cand[rows]
            pools[(m, r)] = members
            avail[members] = False
            v, A, B = level_vals[r] if level_vals[r] is not None else (None, None, None)
            wit[(m, r)] = {int(cand[row]): _witness_list(v[row], v[row] <= w, A, B) for row in rows}

    A = sigma[pools[(1, 0)]]
    B = pi[pools[(1, 1)]]
    if len(A) == 0 or len(B) == 0:
        return None
    v = oracle.query((i * n + A[:, None]) * n + B[None, :], w)
    root_wit = _witness_list(v, v <= w, A, B)
    if not root_wit:
        return None

    steps = [0]

    def dfs(frontier, used2, used3, chosen):
        steps[0] += 1
        if steps[0] > SEARCH_STEP_LIMIT:
            return None
        if not frontier:
            return chosen
        m, r, p = frontier[0]
        rest = frontier[1:]
        for a, b in wit[(m, r)][p]:
            if m == k:
                if a in used2 or b in used3:
                    continue
                got = dfs(rest, used2 | {a}, used3 | {b}, chosen + [(m, r, (p, a, b))])
            else:
                kids = [(m + 1, 2 * r, int(owner2[a])), (m + 1, 2 * r + 1, int(owner3[b]))]
                got = dfs(rest + kids, used2, used3, chosen + [(m, r, (p, a, b))])
            if got is not None:
                return got
        return None

    for a, b in root_wit:
        kids = [(1, 0, int(owner2[a])), (1, 1, int(owner3[b]))]
        chosen = dfs(kids, frozenset(), frozenset(), [(0, 0, (int(i), a, b))])
        if chosen is not None:
            return _assemble(chosen, k, state, w)
        if steps[0] > SEARCH_STEP_LIMIT:
            break
    return None


def _witness_list(vals, good, A, B):
    ia, ib = np.nonzero(good)
    order = np.argsort(vals[ia, ib], kind="stable")
    return [(int(A[ia[o]]), int(B[ib[o]])) for o in order]


def _assemble(chosen, k, state, w) -> AltTree:
    levels = [[None] * (2 ** (lv // 2)) if lv % 2 == 0 else [None] * (2 ** (lv // 2 + 1))
              for lv in range(2 * k + 1)]
    for m, r, (p, a, b) in chosen:
        levels[2 * m][r] = (p, a, b)
        if m < k:
            pa, pb = int(state.owner2[a]), int(state.owner3[b])
            levels[2 * m + 1][2 * r] = (pa, a, int(state.pi[pa]))
            levels[2 * m + 1][2 * r + 1] = (pb, int(state.sigma[pb]), b)
    return AltTree(levels, w)


def apply_tree(state: PartialState, tree: AltTree, charges=None) -> None:
    """Replace the tree's removed triples by its added ones.

    Raises ValueError (leaving ``state`` untouched) unless the tree is feasible
    for ``state``: removed triples must be current, added triples must not
    collide, and exactly one more 1-plane ends up matched.
    """
    added, removed = tree.added, tree.removed
    if charges is None:
        charges = [0.0] * len(added)
    before = state.size
    snap = [a.copy() for a in (state.sigma, state.pi, state.owner2, state.owner3, state.charge)]
    try:
        for i, j, k in removed:
            if state.sigma[i] != j or state.pi[i] != k:
                raise ValueError(f"removed triple ({i}, {j}, {k}) is not in the assignment")
            state.remove(i)
        for (i, j, k), c in zip(added, charges):
            state.add(i, j, k, c)
        if state.size != before + 1:
            raise ValueError("tree does not grow the assignment by one")
    except ValueError:
        state.sigma, state.pi, state.owner2, state.owner3, state.charge = snap
        raise


def _commit(state, tree, oracle, report, phase):
    n = state.n
    charges = oracle.charge([_flat(n, *t) for t in tree.added])
    apply_tree(state, tree, charges)
    if report is not None:
        for t in tree.removed:
            report.trace.append(("remove", phase, *t, 0.0))
        for t, c in zip(tree.added, charges):
            report.trace.append(("add", phase, *t, float(c)))
        total = ordered_sum(charges)
        if phase == "main":
            report.main_cost += total
        else:
            report.final_cost += total
        report.trees += 1


def main_phase(state: PartialState, oracle, sched: BdtsSchedule,
               policy: Optional[RetryPolicy] = None, report: Optional[BdtsReport] = None) -> None:
    policy = policy or RetryPolicy()
    k = sched.k
    need = 2 ** (k + 1) - 2  # matched triples a tree displaces

    def room():
        return len(state.unmatched) >= 2**k and state.size >= need

    for t in range(1, sched.t0 + 1):
        if not room():
            break
        oracle.refresh(sched.w[t - 1])
        target = sched.targets[t + 1]
        added = esc_round = 0
        while len(state.unmatched) > target and room():
            i = int(state.unmatched[0])
            budget = sched.w[t]
            for attempt in range(policy.max_escalations + 1):
                tree = find_tree(state, i, budget, k, oracle, policy.pools_cap)
                if tree is not None:
                    break
                if attempt == policy.max_escalations:
                    raise Exhausted(f"main phase round {t}: no tree for index {i}",
                                    escalations=(report.escalations if report else 0) + esc_round)
                budget *= policy.factor
                esc_round += 1
            _commit(state, tree, oracle, report, "main")
            added += 1
        if report is not None:
            report.escalations += esc_round
            report.rounds.append(RoundStat(t, sched.w[t], added, esc_round))


def _final_search(state, oracle, i, f2, f3, depth, w):
    """Top-down search for a tree adding 1-plane ``i`` with the free pair
    (f2, f3).  Returns a list of (level, added triple) or None."""
    n = state.n
    sigma, pi, owner2, owner3 = state.sigma, state.pi, state.owner2, state.owner3
    removed = set()  # 1-planes displaced by the partial tree
    steps = 0

    def solve(u, g2, g3, dep, lev):
        # on success the subtree's displaced 1-planes stay in ``removed``;
        # on failure ``removed`` is left as it was found
        nonlocal steps
        steps += 1
        if steps > SEARCH_STEP_LIMIT:
            return None
        if dep == 0:
            v = oracle.query([_flat(n, u, g2, g3)], w)[0]
            return [(lev, (u, g2, g3))] if v <= w else None
        own2 = owner2.copy()
        own3 = owner3.copy()
        for p in removed:
            own2[sigma[p]] = -1
            own3[pi[p]] = -1
        A = np.flatnonzero(own2 >= 0)
        B = np.flatnonzero(own3 >= 0)
        if len(A) == 0 or len(B) == 0:
            return None
        vals = oracle.query((u * n + A[:, None]) * n + B[None, :], w)
        ia, ib = np.nonzero(vals <= w)
        keep = own2[A[ia]] != own3[B[ib]]
        ia, ib = ia[keep], ib[keep]
        for o in np.argsort(vals[ia, ib], kind="stable"):
            a, b = int(A[ia[o]]), int(B[ib[o]])
            p1, q1 = int(owner2[a]), int(owner3[b])
            removed.update((p1, q1))
            left = solve(p1, g2, int(pi[p1]), dep - 1, lev + 1)
            if left is not None:
                right = solve(q1, int(sigma[q1]), g3, dep - 1, lev + 1)
                if right is not None:
                    return [(lev, (u, a, b))] + left + right
                removed.difference_update({t[0] for _, t in left} - {p1})
            removed.difference_update((p1, q1))
            if steps > SEARCH_STEP_LIMIT:
                return None
        return None

    return solve(i, f2, f3, depth, 0)


def _final_tree(state, found, depth, w) -> AltTree:
    levels = [[] for _ in range(2 * depth + 1)]
    for lev, (p, a, b) in found:
        levels[2 * lev].append((p, a, b))
        if lev < depth:
            # displaced: the current owners of a and b
            pa, pb = int(state.owner2[a]), int(state.owner3[b])
            levels[2 * lev + 1].append((pa, a, int(state.pi[pa])))
            levels[2 * lev + 1].append((pb, int(state.sigma[pb]), b))
    return AltTree(levels, w)


def _final_depth(k, matched):
    depth = k
    while depth > 0 and 2 ** (depth + 1) - 2 > matched:
        depth -= 1
    return depth


def final_phase(state: PartialState, oracle, sched: BdtsSchedule,
                policy: Optional[RetryPolicy] = None, report: Optional[BdtsReport] = None) -> None:
    """Add the remaining unmatched 1-planes one at a time, top-down.

    A depth-d subproblem "add 1-plane u given free 2-coordinate g2 and free
    3-coordinate g3" is either the single triple (u, g2, g3) (d = 0) or a triple
    (u, a, b) displacing the owners (p, a, p3) and (q, q2, b), followed by the
    subproblems (p, g2, p3) and (q, q2, g3) at depth d - 1.  For d = 1 this is
    the exchange +(u,a,b) -(p,a,p3) -(q,q2,b) +(p,g2,p3) +(q,q2,g3).
    Before each index the oracle is refreshed k times by ``sched.final_w``.
    """
    policy = policy or RetryPolicy()
    k = sched.k
    while len(state.unmatched) > 0:
        i = int(state.unmatched[0])
        for _ in range(k):
            oracle.refresh(sched.final_w)
        depth = _final_depth(k, state.size)
        budget = sched.final_w
        esc = 0
        while True:
            found = None
            for f2 in state.free2:
                for f3 in state.free3:
                    found = _final_search(state, oracle, i, int(f2), int(f3), depth, budget)
                    if found is not None:
                        break
                if found is not None:
                    break
            if found is not None:
                break
            if esc == policy.max_escalations:
                raise Exhausted(f"final phase: no exchange for index {i}",
                                escalations=(report.escalations if report else 0) + esc)
            budget *= policy.factor
            esc += 1
        _commit(state, _final_tree(state, found, depth, budget), oracle, report, "final")
        if report is not None:
            report.escalations += esc
            report.rounds.append(RoundStat(-1, budget, 1, esc))


def bdts(input: Union[CostTensor, tuple], k: int = 1, mode: Optional[str] = None,
         policy: Optional[RetryPolicy] = None, L: float = 1.0, check: bool = True):
    """Run BDTS(k).

    Parameters
    ----------
    input : CostTensor or (n, seed)
        A tensor runs in fixed-instance mode; an ``(n, seed)`` pair runs in
        distributional mode against a lazily revealed Exp(1) array.
    mode : {"fixed", "distributional"}, optional
        Inferred from ``input`` when omitted.
    check : bool
        Verify the partial-assignment invariants after every tree.

    Returns
    -------
    (PlanarAssignment, BdtsReport)
        ``report.assignment_cost`` sums the charges of the output triples; in
        fixed mode that is the exact cost.  ``report.cost_upper`` sums the
        charges of every triple ever added, an upper bound on the original cost
        in distributional mode.  ``report.cost`` picks the one matching the mode.
    """
    policy = policy or RetryPolicy()
    if isinstance(input, CostTensor):
        if input.d != 3:
            raise ValueError(f"BDTS needs a 3-dimensional tensor, got d={input.d}")
        mode = mode or "fixed"
        if mode != "fixed":
            raise ValueError("a concrete tensor can only be solved in fixed mode")
        oracle = FixedCosts(input)
        n = input.n
    else:
        n, seed = input
        mode = mode or "distributional"
        if mode != "distributional":
            raise ValueError("(n, seed) input requires distributional mode")
        oracle = RefreshableCosts(n, seed)
    sched = make_schedule(n, k, L=L, final_constant=policy.final_constant)
    report = BdtsReport(n=n, k=k, mode=mode)
    state = greedy_phase(oracle, sched, report)
    main_phase(state, oracle, sched, policy, report)
    if check:
        state.check()
    final_phase(state, oracle, sched, policy, report)
    if check:
        state.check()
    report.assignment_cost = ordered_sum(state.charge)
    report.offset = oracle.offset
    return state.to_planar(), report

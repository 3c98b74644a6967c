import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mdap.errors import Infeasible
from mdap.matching import MatchMatrix, brute_force_matching, min_cost_matching
from mdap.model import make_rng, exp_variates
from oracles import brute_matching_cost, scipy_matching_cost


def test_two_by_two():
    perm, cost = min_cost_matching([[1, 2], [3, 1]])
    assert list(perm) == [0, 1] and cost == 2
    assert brute_force_matching([[1, 2], [3, 1]]).cost == 2


@pytest.mark.parametrize("n", [1, 2, 5, 9])
def test_zero_matrix(n):
    assert min_cost_matching(np.zeros((n, n))).cost == 0


def test_single_entry():
    assert brute_force_matching([[0.7]]).cost == 0.7
    assert min_cost_matching([[0.7]]).cost == 0.7


def test_forbidden_row_infeasible():
    forb = np.zeros((3, 3), dtype=bool)
    forb[0] = True
    with pytest.raises(Infeasible):
        brute_force_matching(np.ones((3, 3)), forbidden=forb)
    with pytest.raises(Infeasible):
        min_cost_matching(np.ones((3, 3)), forbidden=forb)


def test_forbidden_hall_violation():
    # rows 0 and 1 may only use column 0
    forb = np.array([[0, 1, 1], [0, 1, 1], [0, 0, 0]], dtype=bool)
    with pytest.raises(Infeasible):
        min_cost_matching(np.ones((3, 3)), forbidden=forb)


def test_forbidden_avoided():
    c = np.array([[0.0, 9.0], [9.0, 0.0]])
    forb = np.eye(2, dtype=bool)
    perm, cost = min_cost_matching(c, forbidden=forb)
    assert list(perm) == [1, 0] and cost == 18.0


def test_brute_force_size_limit():
    with pytest.raises(ValueError):
        brute_force_matching(np.zeros((9, 9)))


def test_validation():
    with pytest.raises(ValueError):
        MatchMatrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        MatchMatrix(np.array([[1.0, -1.0], [0.0, 0.0]]))


def test_equals_brute_force_4x4():
    rng = make_rng(41)
    for _ in range(500):
        a = exp_variates(rng, (4, 4))
        assert min_cost_matching(a).cost == brute_force_matching(a).cost


def _check_certificate(a, forb, res):
    u, v = res.row_potential, res.col_potential
    red = a - u[:, None] - v[None, :]
    tol = 1e-9 * max(1.0, float(np.max(a[~forb])) if (~forb).any() else 1.0)
    assert np.all(red[~forb] >= -tol)
    n = a.shape[0]
    assert np.all(np.abs(red[np.arange(n), res.perm]) <= tol)


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 7).flatmap(lambda n: st.tuples(
    arrays(np.float64, (n, n), elements=st.floats(0, 100, allow_nan=False, width=32)),
    arrays(np.bool_, (n, n), elements=st.booleans()))))
def test_against_scipy_and_certificate(arg):
    a, forb = arg
    n = a.shape[0]
    forb = forb.copy()
    forb[np.arange(n), np.arange(n)] = False  # keep the instance feasible
    res = min_cost_matching(a, forbidden=forb)
    assert not forb[np.arange(n), res.perm].any()
    assert sorted(res.perm) == list(range(n))
    assert res.cost == pytest.approx(scipy_matching_cost(a, forb), rel=1e-12, abs=1e-9)
    _check_certificate(a, forb, res)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_equals_brute_force_exactly(n, seed):
    a = exp_variates(make_rng(seed), (n, n))
    assert min_cost_matching(a).cost == brute_force_matching(a).cost
    assert min_cost_matching(a).cost == pytest.approx(brute_matching_cost(a.tolist()), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 12), st.integers(0, 2**32 - 1), st.floats(0.01, 100))
def test_scale_equivariance(n, seed, lam):
    a = exp_variates(make_rng(seed), (n, n))
    r1, r2 = min_cost_matching(a), min_cost_matching(lam * a)
    assert r2.cost == pytest.approx(lam * r1.cost, rel=1e-9)
    # the original optimum stays optimal after scaling
    kept = sum(lam * a[i, r1.perm[i]] for i in range(n))
    assert kept == pytest.approx(r2.cost, rel=1e-9)


def test_deterministic_ties():
    a = np.ones((6, 6))
    assert list(min_cost_matching(a).perm) == list(min_cost_matching(a).perm)

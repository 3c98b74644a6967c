import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdap.axial import axial_greedy, axial_lower_bound, dfm_slice_bound
from mdap.model import CostTensor, is_latin_assignment, sample_tensor
from oracles import harmonic

# 2 * 15 * H_15, frozen from exact rational arithmetic
DFM_SUM_15 = 99.5468697968698


def test_n1():
    t = sample_tensor(1, 3, 4)
    L, rep = axial_greedy(t)
    assert L.K.tolist() == [[0]] and rep.total == t.costs[0]


def test_n2_forced_second_slice():
    c = np.array([[[0, 5], [5, 0]], [[1, 2], [3, 4]]], dtype=float)
    L, rep = axial_greedy(CostTensor.from_array(c))
    assert L.K.tolist() == [[0, 1], [1, 0]]
    assert rep.slice_costs == (0.0, 5.0)


def test_dfm_bound():
    assert dfm_slice_bound(1, 10) == 2.0
    assert dfm_slice_bound(10, 10) == 20.0
    assert float(2 * 15 * harmonic(15)) == pytest.approx(DFM_SUM_15, rel=1e-15)
    assert sum(dfm_slice_bound(i, 15) for i in range(1, 16)) == pytest.approx(DFM_SUM_15, rel=1e-12)
    for bad in (0, 11):
        with pytest.raises(ValueError):
            dfm_slice_bound(bad, 10)


def test_lower_bound_examples():
    assert axial_lower_bound(CostTensor.from_array(np.zeros((3, 3, 3)))) == 0.0
    slab = [[1, 2], [3, 1]]
    assert axial_lower_bound(CostTensor.from_array(np.array([slab, slab], dtype=float))) == 4.0


def test_lower_bound_general_d():
    t = sample_tensor(3, 4, 1)
    # n^(d-2) = 9 slabs
    from mdap.matching import min_cost_matching
    expected = 0.0
    for s in t.costs.reshape(-1, 3, 3):
        expected += min_cost_matching(s).cost
    assert axial_lower_bound(t) == expected


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**32 - 1))
def test_invariants(n, seed):
    t = sample_tensor(n, 3, seed)
    L, rep = axial_greedy(t)
    assert is_latin_assignment(L.K)
    # each slice's matching uses n distinct (j, k) pairs and together they partition all n^2
    pairs = {(j, int(L.K[i, j])) for i in range(n) for j in range(n)}
    assert len(pairs) == n * n
    assert all(z >= 0 for z in rep.slice_costs)
    assert rep.total == L.cost(t)
    assert rep.total >= axial_lower_bound(t)
    assert rep.slice_bounds == tuple(2 * n / (n - i) for i in range(n))


def test_rejects_wrong_dimension():
    with pytest.raises(ValueError):
        axial_greedy(sample_tensor(3, 2, 0))

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from djnmr import (
    DensityState,
    apply,
    count_accessible_pops,
    ideal_multitransition_pi,
    pops_state,
    pseudopure_state,
    thermal_state,
    transition_table,
)
from djnmr.systems import index_to_label


def test_thermal_diagonal_entries(s3):
    rho = thermal_state(s3)
    m = rho.matrix
    assert np.abs(m - np.diag(np.diag(m))).max() == 0.0
    # Entry per level: half the (zeros - ones) count of its label.
    for idx in range(s3.dim):
        label = index_to_label(idx, s3.n)
        expect = 0.5 * (label.count("0") - label.count("1"))
        assert m[idx, idx].real == pytest.approx(expect, abs=1e-12)
    assert abs(np.trace(m)) <= 1e-12


def test_pseudopure_projector(s3):
    rho = pseudopure_state(s3, "101")
    m = rho.matrix
    assert m[5, 5] == 1.0
    assert np.abs(m).sum() == 1.0
    assert np.trace(m) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        pseudopure_state(s3, "10")


def test_pops_difference_and_antisymmetry(s3):
    rho = pops_state(s3, "000", "100")
    m = rho.matrix
    assert m[0, 0] == 1.0
    assert m[4, 4] == -1.0
    assert abs(np.trace(m)) == 0.0
    flipped = pops_state(s3, "100", "000")
    assert np.array_equal(flipped.matrix, -m)
    with pytest.raises(ValueError, match="differ"):
        pops_state(s3, "000", "000")


def test_pops_equals_thermal_minus_inverted(s3):
    # The preparation identity behind the two-experiment subtraction: an
    # ideal pi on one work-spin line turns thermal into thermal plus a pure
    # projector swap, so the difference is exactly the POPS state.
    table = transition_table(s3, s3.work_spin)
    t = next(x for x in table if x.data_pattern == "00")
    u = ideal_multitransition_pi(s3, [t])
    rho2 = thermal_state(s3)
    rho3 = apply(u, rho2)
    diff = rho2.matrix - rho3.matrix
    want = pops_state(s3, *t.level_pair).matrix
    assert np.abs(diff - want).max() <= 1e-12


def test_state_validation():
    with pytest.raises(ValueError, match="Hermitian"):
        DensityState(np.array([[0.0, 1.0], [0.0, 0.0]]), kind="derived")
    with pytest.raises(ValueError, match="traceless"):
        DensityState(np.eye(2), kind="thermal")
    with pytest.raises(ValueError, match="unit trace"):
        DensityState(np.eye(2), kind="pseudopure")
    with pytest.raises(ValueError, match="kind"):
        DensityState(np.zeros((2, 2)), kind="mystery")


def test_counting_examples():
    c = count_accessible_pops(5)
    assert c == {"pseudopure_states": 32, "pairs": 496, "accessible_pops": 80}
    c = count_accessible_pops(3)
    assert c == {"pseudopure_states": 8, "pairs": 28, "accessible_pops": 12}
    with pytest.raises(ValueError):
        count_accessible_pops(0)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 5), data=st.data())
def test_pops_traceless_and_rank_two(n, data):
    from djnmr import SpinSystem
    sys = SpinSystem(shifts=list(range(0, 1000 * n, 1000)),
                     couplings=[50.0] * (n * (n - 1) // 2))
    a = data.draw(st.integers(0, (1 << n) - 1))
    b = data.draw(st.integers(0, (1 << n) - 1).filter(lambda x: x != a))
    rho = pops_state(sys, index_to_label(a, n), index_to_label(b, n))
    assert abs(np.trace(rho.matrix)) <= 1e-12
    eig = np.linalg.eigvalsh(rho.matrix)
    assert np.sum(np.abs(eig) > 1e-12) == 2

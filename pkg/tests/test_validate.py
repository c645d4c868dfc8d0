import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from poslin.model import AbsProblem, NormProblem
from poslin.validate import check, check_abs, check_norm, is_irreducible, observability_horizon


def test_example2_passes(example2):
    rep = check_abs(example2)
    assert rep.passed
    # (1.5 - 1) * (1 - 0.5)^0
    np.testing.assert_allclose(rep.observability_vector, [0.5])


def test_example1_fails_only_observability(example1):
    rep = check_abs(example1)
    assert not rep.passed
    assert rep.failed_checks() == ["observability"]
    assert rep["observability"].witness["value"] == 0.0


def test_negative_E_flagged():
    prob = AbsProblem(A=[[2.0]], B=[[0.5]], E=[[-1.0]], s=[2.0], r=[1.0])
    rep = check_abs(prob)
    assert "E_nonnegative" in rep.failed_checks()
    assert rep["E_nonnegative"].witness == {"index": [0, 0], "value": -1.0}


def test_example4_passes(example4):
    rep = check_norm(example4)
    assert rep.passed
    np.testing.assert_allclose(rep.observability_vector, [0.5])  # 1 - 0.05 * 10


def test_example3_fails_observability(example3):
    rep = check_norm(example3)
    assert rep.failed_checks() == ["observability"]


def test_negative_N_flagged():
    prob = NormProblem(A=[[0.9, 0.0], [0.0, 0.9]], B=[[1.0], [0.0]], N=[0.05, -0.1], s=[1.0, 1.0], r=[1.0])
    assert "N_nonnegative" in check_norm(prob).failed_checks()


def test_dominance_checks_have_witnesses():
    prob = AbsProblem(A=[[0.1]], B=[[1.0]], E=[[1.0]], s=[0.5], r=[1.0])
    rep = check(prob)
    assert rep["A_dominates_BE"].witness["index"] == [0, 0]
    assert rep["A_dominates_BE"].witness["value"] == pytest.approx(-0.9)
    assert rep["s_dominates_Er"].witness["value"] == pytest.approx(-0.5)


def test_report_is_deterministic(example2):
    assert check(example2).to_dict() == check(example2).to_dict()


def test_observability_horizon_examples():
    assert observability_horizon([0, 1], [[1, 0], [1, 0]], 2) == 2
    assert observability_horizon([1, 1, 1], np.random.default_rng(0).uniform(size=(3, 3)), 3) == 1
    for max_len in (1, 2, 5, 50):
        assert observability_horizon([0, 1], np.eye(2), max_len) is None


def test_observability_horizon_rejects_negative():
    with pytest.raises(ValueError):
        observability_horizon([-1, 1], np.eye(2), 2)


def test_is_irreducible_examples():
    assert not is_irreducible([[1, 0], [1, 0]])
    assert is_irreducible([[0, 1], [1, 0]])
    assert is_irreducible([[0]])  # sum reduces to the identity
    with pytest.raises(ValueError):
        is_irreducible([[0, -1], [1, 0]])


nonneg = st.floats(min_value=0, max_value=2)


@st.composite
def sparse_pairs(draw):
    n = draw(st.integers(1, 5))
    mask_v = draw(arrays(bool, n))
    mask_M = draw(arrays(bool, (n, n), elements=st.booleans()))
    v = draw(arrays(float, n, elements=nonneg)) * mask_v
    M = draw(arrays(float, (n, n), elements=nonneg)) * (mask_M & draw(arrays(bool, (n, n))))
    return v, M


@given(sparse_pairs())
def test_horizon_beyond_n_never_helps(pair):
    v, M = pair
    n = v.size
    within = observability_horizon(v, M, n)
    beyond = observability_horizon(v, M, 4 * n + 3)
    assert (within is None) == (beyond is None)
    if within is not None:
        assert beyond == within


@given(sparse_pairs())
def test_irreducible_and_nonzero_implies_observable(pair):
    v, M = pair
    if is_irreducible(M) and np.any(v > 0):
        assert observability_horizon(v, M, v.size) is not None

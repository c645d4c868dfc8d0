import numpy as np
import pytest

from conftest import abs_instances, example2_problem, example4_problem, norm_instances
from oracles import charpoly_radius, piecewise_fixed_points, vi_lower_bound
from poslin.bellman import apply_T
from poslin.errors import (
    InfeasiblePolicyError,
    NoStabilizingPolicyError,
    SeedError,
    UnstablePolicyError,
)
from poslin.generate import random_abs_problem
from poslin.model import AbsProblem
from poslin.solvers import (
    OpiSchedule,
    Status,
    find_initial_policy,
    find_opi_seed,
    optimistic_pi,
    policy_evaluation,
    policy_iteration,
    policy_iteration_abs,
    policy_iteration_norm,
    solve,
    value_iteration,
)

UNSTABILIZABLE = AbsProblem(A=[[2.0]], B=[[0.0]], E=[[0.0]], s=[1.0], r=[0.0])

# ---------------------------------------------------------------- value iteration


def test_vi_example2():
    res = value_iteration(example2_problem(), [0.0], tol=1e-10, record_iterates=True)
    assert res.status is Status.CONVERGED
    assert res.p_star[0] == pytest.approx(5.0, abs=1e-9)
    assert res.policy.L.tolist() == [[-1.0]]
    assert res.policy.stable and res.spectral.rho == pytest.approx(0.5)
    first = [float(p[0]) for p in res.extra["iterates"][:3]]
    assert first == pytest.approx([0.0, 0.5, 1.25])
    assert res.certificate <= 1e-10


def test_vi_example4():
    res = value_iteration(example4_problem())
    assert res.status is Status.CONVERGED
    assert res.p_star[0] == pytest.approx(10.0, abs=1e-8)


def test_vi_diverges_on_unstabilizable():
    res = value_iteration(UNSTABILIZABLE)
    assert res.status is Status.DIVERGED
    assert res.p_star is None


def test_vi_iter_limit():
    res = value_iteration(example2_problem(), max_iter=3)
    assert res.status is Status.ITER_LIMIT


def test_vi_rejects_negative_seed():
    with pytest.raises(ValueError):
        value_iteration(example2_problem(), [-1.0])


def test_vi_monotone_from_zero_and_lower_bound():
    for prob in abs_instances()[:100]:
        res = value_iteration(prob, record_iterates=True, max_iter=2000)
        its = res.extra["iterates"]
        for a, b in zip(its, its[1:]):
            assert np.all(b >= a - 1e-12)
        for k in range(min(prob.n, len(its) - 1) + 1):
            assert np.all(its[k] >= vi_lower_bound(prob.A, prob.B, prob.E, prob.s, prob.r, k) - 1e-10)
        if len(its) > prob.n:
            assert np.all(its[prob.n] > 0)


def test_vi_matches_piecewise_oracle():
    # the nonnegative fixed point is unique under the standing assumptions
    for prob in abs_instances()[:60]:
        res = value_iteration(prob)
        roots = [p for p in piecewise_fixed_points(prob.A, prob.B, prob.E, prob.s, prob.r) if np.all(p >= -1e-9)]
        assert len(roots) == 1
        np.testing.assert_allclose(res.p_star, roots[0], rtol=1e-7, atol=1e-7)


# ---------------------------------------------------------------- policy evaluation


def test_policy_evaluation_examples():
    assert policy_evaluation(example2_problem(), [[-1.0]])[0] == pytest.approx(5.0)
    assert policy_evaluation(example4_problem(), [[0.05]])[0] == pytest.approx(10.0)
    assert policy_evaluation(example4_problem(), [[-0.05]])[0] == pytest.approx(10.0)


def test_policy_evaluation_errors():
    with pytest.raises(UnstablePolicyError):
        policy_evaluation(example2_problem(), [[1.0]])
    with pytest.raises(InfeasiblePolicyError):
        policy_evaluation(example2_problem(), [[-2.0]])
    with pytest.raises(InfeasiblePolicyError):
        policy_evaluation(example4_problem(), [[0.06]])


def test_policy_evaluation_is_fixed_point_of_restricted_operator():
    from poslin.bellman import apply_T_L

    for prob in abs_instances()[:80] + norm_instances()[:30]:
        L = find_initial_policy(prob)
        p = policy_evaluation(prob, L)
        np.testing.assert_allclose(apply_T_L(p, L, prob), p, rtol=1e-9, atol=1e-9)


# ---------------------------------------------------------------- policy iteration


def test_pi_example2_from_optimal_gain():
    res = policy_iteration_abs(example2_problem(), [[-1.0]])
    assert res.status is Status.CONVERGED
    assert res.iterations == 1
    assert res.p_star[0] == pytest.approx(5.0)


def test_pi_example2_unstable_start():
    with pytest.raises(UnstablePolicyError):
        policy_iteration_abs(example2_problem(), [[1.0]])


def test_pi_norm_examples():
    for L0 in ([[0.05]], [[-0.05]]):
        res = policy_iteration_norm(example4_problem(), L0)
        assert res.status is Status.CONVERGED
        assert res.p_star[0] == pytest.approx(10.0)
    with pytest.raises(InfeasiblePolicyError):
        policy_iteration_norm(example4_problem(), [[0.1]])


def test_pi_finite_termination_and_decrease():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        prob = random_abs_problem(rng, 2, 2)
        res = policy_iteration_abs(prob)
        assert res.status is Status.CONVERGED
        assert res.iterations <= 2 ** prob.m + 1
        costs = [np.array(c) for c in res.extra["policy_costs"]]
        # distinct improvement steps never exceed 2^m
        assert len(costs) - 1 <= 2 ** prob.m + 1
        for a, b in zip(costs, costs[1:]):
            assert np.all(b <= a + 1e-9 * max(1.0, np.max(np.abs(a))))


def test_pi_cost_decrease_larger_instances():
    for prob in abs_instances()[:150]:
        res = policy_iteration(prob)
        costs = [np.array(c) for c in res.extra["policy_costs"]]
        for a, b in zip(costs, costs[1:]):
            assert np.all(b <= a + 1e-9 * max(1.0, np.max(np.abs(a))))


# ---------------------------------------------------------------- optimistic PI


def test_opi_unit_schedule_is_vi_from_above():
    prob = example2_problem()
    res = optimistic_pi(prob, [6.0], schedule=1, record_iterates=True)
    vi = value_iteration(prob, [6.0], record_iterates=True)
    assert res.p_star[0] == pytest.approx(5.0, abs=1e-9)
    n = min(len(res.extra["iterates"]), len(vi.extra["iterates"]))
    np.testing.assert_allclose(res.extra["iterates"][:n], vi.extra["iterates"][:n], rtol=1e-14)


def test_opi_example2_schedule5_monotone():
    res = optimistic_pi(example2_problem(), [6.0], schedule=5, record_iterates=True)
    assert res.status is Status.CONVERGED
    assert res.p_star[0] == pytest.approx(5.0, abs=1e-9)
    its = [float(p[0]) for p in res.extra["iterates"]]
    assert all(b <= a + 1e-15 for a, b in zip(its, its[1:]))
    assert all(p >= 5.0 - 1e-12 for p in its)
    assert res.extra["k_bar"] == 0


def test_opi_seed_error():
    with pytest.raises(SeedError):
        optimistic_pi(example2_problem(), [0.0])


def test_opi_schedule_cycles_and_validates():
    assert [x for _, x in zip(range(5), OpiSchedule.of([1, 3]))] == [1, 3, 1, 3, 1]
    with pytest.raises(ValueError):
        OpiSchedule.of([2, 0])


def test_opi_sandwich_against_vi_from_same_seed():
    for prob in abs_instances()[:80] + norm_instances()[:30]:
        seed = find_opi_seed(prob)
        ref = solve(prob, "lp").p_star if hasattr(prob, "E") else value_iteration(prob).p_star
        opi = optimistic_pi(prob, seed, schedule=[2, 4, 7], max_iter=200, record_iterates=True)
        vi = value_iteration(prob, seed, max_iter=200, record_iterates=True)
        n = min(len(opi.extra["iterates"]), len(vi.extra["iterates"]))
        scale = 1e-8 * max(1.0, float(np.max(seed)))
        for k in range(n):
            p_opi, p_vi = opi.extra["iterates"][k], vi.extra["iterates"][k]
            assert np.all(p_opi <= p_vi + scale)
            assert np.all(ref <= p_opi + scale)


def test_opi_k_bar_marks_optimal_tail():
    from poslin.bellman import optimal_policy_set_abs

    for prob in abs_instances()[:60]:
        res = optimistic_pi(prob, record_iterates=True)
        opt = optimal_policy_set_abs(res.p_star, prob)
        gains = res.extra["gains"]
        k_bar = res.extra["k_bar"]
        assert all(opt.contains(L) for L in gains[k_bar:])
        if k_bar > 0:
            assert not opt.contains(gains[k_bar - 1])


# ---------------------------------------------------------------- seeds


def test_find_initial_policy_examples():
    assert find_initial_policy(example2_problem()).L.tolist() == [[-1.0]]
    L = find_initial_policy(example4_problem()).L
    assert abs(L[0, 0]) <= 0.05 + 1e-15
    with pytest.raises(NoStabilizingPolicyError):
        find_initial_policy(UNSTABILIZABLE)


def test_find_opi_seed_examples():
    assert find_opi_seed(example2_problem())[0] == pytest.approx(5.0)
    assert find_opi_seed(example4_problem())[0] == pytest.approx(10.0)
    with pytest.raises(NoStabilizingPolicyError):
        find_opi_seed(UNSTABILIZABLE)


# ---------------------------------------------------------------- cross-method


def _bigger_instances(count=40, seed=99):
    rng = np.random.default_rng(seed)
    return [random_abs_problem(rng, int(rng.integers(1, 7)), int(rng.integers(1, 7))) for _ in range(count)]


@pytest.mark.parametrize("prob", _bigger_instances(), ids=lambda p: f"n{p.n}m{p.m}")
def test_methods_agree_abs(prob):
    tol = 1e-10
    results = {m: solve(prob, m, tol=tol) for m in ("vi", "pi", "opi")}
    ref = results["pi"].p_star
    for name, res in results.items():
        assert res.status is Status.CONVERGED, name
        # VI stops on a step of size tol; the distance to p* is tol / (1 - contraction)
        np.testing.assert_allclose(res.p_star, ref, atol=10 * tol / (1 - res.spectral.rho) * max(1, np.max(ref)))
        assert np.max(np.abs(apply_T(res.p_star, prob) - res.p_star)) <= max(tol, 1e-12 * np.max(ref)) * 10
        assert res.spectral.rho < 1
        assert charpoly_radius(prob.A + prob.B @ res.policy.L) < 1
        assert np.all(res.p_star >= 0)


def test_methods_agree_norm():
    tol = 1e-10
    for prob in norm_instances():
        results = {m: solve(prob, m, tol=tol) for m in ("vi", "pi", "opi")}
        ref = results["pi"].p_star
        for name, res in results.items():
            assert res.status is Status.CONVERGED, name
            np.testing.assert_allclose(res.p_star, ref, atol=10 * tol / (1 - res.spectral.rho) * max(1, np.max(ref)))
            assert res.spectral.rho < 1


def test_solve_maps_unstabilizable_to_diverged():
    for method in ("vi", "pi", "opi", "lp"):
        assert solve(UNSTABILIZABLE, method).status is Status.DIVERGED


def test_solve_rejects_unknown_method():
    with pytest.raises(ValueError):
        solve(example2_problem(), "newton")


def test_result_serializes():
    d = solve(example2_problem(), "pi").to_dict()
    assert d["status"] == "converged"
    assert d["p_star"] == pytest.approx([5.0])
    assert d["policy"]["L"] == [[-1.0]]

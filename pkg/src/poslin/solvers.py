"""Value iteration, policy iteration, and optimistic policy iteration.

All three work on both problem classes through the dispatching operators in
:mod:`poslin.bellman`.  Every returned ``SolveResult`` carries the sup-norm
Bellman residual at the returned point as its certificate, and converged
results carry the greedy gain with a spectral certificate of its closed loop.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Union

import numpy as np

from . import bellman
from .errors import (
    InfeasiblePolicyError,
    InternalConsistencyError,
    NoStabilizingPolicyError,
    SeedError,
    SingularSystemError,
    SpectralError,
    UnstablePolicyError,
)
from .model import AbsProblem, NormProblem, Policy, Problem, gain_matrix
from .spectral import DEFAULT_MARGIN, SpectralCertificate, spectral_radius

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100_000
DIVERGENCE_CAP = 1e12
GROWTH_WARMUP = 1000
GROWTH_WINDOW = 50
GROWTH_CHECKS = 10


class Status(enum.Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    ITER_LIMIT = "iter_limit"


@dataclass
class SolveResult:
    method: str
    status: Status
    p_star: Optional[np.ndarray] = None
    policy: Optional[Policy] = None
    iterations: int = 0
    history: Optional[list] = None
    certificate: Optional[float] = None
    spectral: Optional[SpectralCertificate] = None
    message: str = ""
    extra: dict = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    def to_dict(self, include_history: bool = False) -> dict:
        out = {
            "method": self.method,
            "status": self.status.value,
            "p_star": None if self.p_star is None else self.p_star.tolist(),
            "policy": None if self.policy is None else self.policy.to_dict(),
            "iterations": self.iterations,
            "residual": self.certificate,
            "spectral": None if self.spectral is None else self.spectral.to_dict(),
            "message": self.message,
        }
        if self.extra:
            out.update(self.extra)
        if include_history and self.history is not None:
            out["history"] = [[k, r] for k, r in self.history]
        return out


@dataclass(frozen=True)
class OpiSchedule:
    """Sweep lengths ``l_k``; an explicit list is cycled."""

    lengths: tuple

    def __post_init__(self):
        if not self.lengths or any(int(l) < 1 or int(l) != l for l in self.lengths):
            raise ValueError(f"sweep lengths must be positive integers, got {self.lengths}")

    @classmethod
    def of(cls, value: Union[int, Sequence[int], "OpiSchedule"]) -> "OpiSchedule":
        if isinstance(value, OpiSchedule):
            return value
        if isinstance(value, (int, np.integer)):
            return cls((int(value),))
        return cls(tuple(int(x) for x in value))

    def __iter__(self):
        return itertools.cycle(self.lengths)


def _sup(v) -> float:
    return float(np.max(np.abs(v))) if np.size(v) else 0.0


def closed_loop(problem: Problem, L) -> np.ndarray:
    return problem.A + problem.B @ gain_matrix(L)


def certify(problem: Problem, policy: Policy, margin: float = DEFAULT_MARGIN):
    """Attach the spectral radius of ``A + BL`` to ``policy``."""
    cert = spectral_radius(closed_loop(problem, policy), margin=margin)
    return replace(policy, spectral_radius=cert.rho, stable=cert.stable), cert


def _converged_result(method, problem, p, iterations, history, residual, margin, **extra) -> SolveResult:
    policy, cert = certify(problem, bellman.greedy(p, problem), margin)
    return SolveResult(
        method=method,
        status=Status.CONVERGED,
        p_star=p,
        policy=policy,
        iterations=iterations,
        history=history,
        certificate=residual,
        spectral=cert,
        extra=extra,
    )


# ---------------------------------------------------------------- value iteration


def value_iteration(
    problem: Problem,
    p0=None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    margin: float = DEFAULT_MARGIN,
    record_iterates: bool = False,
) -> SolveResult:
    """Iterate ``p <- T(p)`` until ``||T(p) - p||_inf <= tol``.

    Divergence is declared when ``||p||_inf`` exceeds 1e12, or when after a
    warm-up the residual has grown at ``GROWTH_CHECKS`` consecutive window
    checks.  Neither test is a proof of infinite cost; :func:`poslin.lp.solve_via_lp`
    is the authoritative decision procedure.
    """
    p = np.zeros(problem.n) if p0 is None else np.array(p0, dtype=float).reshape(-1)
    if p.size != problem.n:
        raise ValueError(f"p0 has length {p.size}, expected {problem.n}")
    if np.any(p < 0):
        raise ValueError("p0 must be elementwise nonnegative")
    history = []
    iterates = [p.copy()] if record_iterates else None
    last_check = np.inf
    growth = 0
    for k in range(max_iter + 1):
        q = bellman.apply_T(p, problem)
        res = _sup(q - p)
        history.append((k, res))
        if res <= tol:
            result = _converged_result("vi", problem, p, k, history, res, margin)
            if record_iterates:
                result.extra["iterates"] = iterates
            return result
        if k == max_iter:
            break
        if _sup(q) > DIVERGENCE_CAP or not np.all(np.isfinite(q)):
            return SolveResult("vi", Status.DIVERGED, iterations=k + 1, history=history, certificate=res,
                               message="iterates exceeded 1e12: J* appears infinite")
        if k >= GROWTH_WARMUP and k % GROWTH_WINDOW == 0:
            growth = growth + 1 if res > last_check else 0
            last_check = res
            if growth >= GROWTH_CHECKS:
                return SolveResult("vi", Status.DIVERGED, iterations=k + 1, history=history, certificate=res,
                                   message="residual grew over consecutive windows: J* appears infinite")
        p = q
        if record_iterates:
            iterates.append(p.copy())
    result = SolveResult("vi", Status.ITER_LIMIT, p_star=None, iterations=max_iter, history=history,
                         certificate=history[-1][1], message=f"no convergence in {max_iter} iterations")
    if record_iterates:
        result.extra["iterates"] = iterates
    return result


# ---------------------------------------------------------------- policy evaluation


def policy_evaluation(problem: Problem, L, margin: float = DEFAULT_MARGIN) -> np.ndarray:
    """Cost vector of the stationary gain ``L``: solves ``(I - A - BL)' p = s + L'r``."""
    M = gain_matrix(L)
    if not bellman.gain_feasible(M, problem):
        raise InfeasiblePolicyError(f"gain {M.tolist()} is not feasible")
    K = closed_loop(problem, M)
    try:
        cert = spectral_radius(K, margin=margin)
    except SpectralError as exc:
        raise UnstablePolicyError(f"could not certify closed loop: {exc}") from exc
    if not cert.stable:
        raise UnstablePolicyError(f"closed loop A+BL has spectral radius {cert.rho:.12g} >= 1")
    lhs = (np.eye(problem.n) - K).T
    rhs = problem.s + M.T @ problem.r
    try:
        p = np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    if not np.all(np.isfinite(p)) or np.linalg.cond(lhs) > 1e14:
        raise SingularSystemError("I - A - BL is singular to working precision")
    return p


# ---------------------------------------------------------------- policy iteration


def _initial_gain(problem: Problem, L0) -> np.ndarray:
    if L0 is None:
        return gain_matrix(find_initial_policy(problem))
    M = gain_matrix(L0)
    if not bellman.gain_feasible(M, problem):
        raise InfeasiblePolicyError(f"initial gain {M.tolist()} is not feasible")
    return M


def _pi_loop(problem, L0, tol, max_improvements, margin, method, hard_cap):
    L = _initial_gain(problem, L0)
    p = policy_evaluation(problem, L, margin)
    history = [(0, _sup(bellman.apply_T(p, problem) - p))]
    costs = [p]
    for k in range(1, max_improvements + 1):
        L_new = gain_matrix(bellman.greedy(p, problem))
        same = np.array_equal(L_new, L)
        p_new = p if same else policy_evaluation(problem, L_new, margin)
        costs.append(p_new)
        history.append((k, _sup(bellman.apply_T(p_new, problem) - p_new)))
        if same or _sup(p_new - p) <= tol * max(1.0, _sup(p)):
            return _converged_result(method, problem, p_new, k, history, history[-1][1], margin,
                                     policy_costs=[c.tolist() for c in costs])
        L, p = L_new, p_new
    if hard_cap:
        raise InternalConsistencyError(
            f"policy iteration did not terminate within {max_improvements} improvements"
        )
    return SolveResult(method, Status.ITER_LIMIT, p_star=p, iterations=max_improvements, history=history,
                       certificate=history[-1][1], message="improvement limit reached",
                       extra={"policy_costs": [c.tolist() for c in costs]})


def policy_iteration_abs(problem: AbsProblem, L0=None, tol: float = DEFAULT_TOL,
                         margin: float = DEFAULT_MARGIN) -> SolveResult:
    """Exact PI; stops when successive policy costs agree to ``tol``.

    At most ``2**m`` distinct greedy gains exist, so more than ``2**m + 1``
    improvements raises ``InternalConsistencyError``.
    """
    return _pi_loop(problem, L0, tol, 2 ** problem.m + 1, margin, "pi", hard_cap=True)


def policy_iteration_norm(problem: NormProblem, L0=None, tol: float = DEFAULT_TOL, max_iter: int = 10_000,
                          margin: float = DEFAULT_MARGIN) -> SolveResult:
    return _pi_loop(problem, L0, tol, max_iter, margin, "pi", hard_cap=False)


def policy_iteration(problem: Problem, L0=None, tol: float = DEFAULT_TOL, max_iter: int = 10_000,
                     margin: float = DEFAULT_MARGIN) -> SolveResult:
    if isinstance(problem, AbsProblem):
        return policy_iteration_abs(problem, L0, tol, margin)
    return policy_iteration_norm(problem, L0, tol, max_iter, margin)


# ---------------------------------------------------------------- optimistic PI


def _seed_tolerance(p) -> float:
    return 1e-9 * max(1.0, _sup(p))


def optimistic_pi(
    problem: Problem,
    p0=None,
    schedule: Union[int, Sequence[int], OpiSchedule] = 5,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    margin: float = DEFAULT_MARGIN,
    record_iterates: bool = False,
) -> SolveResult:
    """Optimistic PI from a seed with ``p0 >= T(p0)``.

    Each step takes the greedy gain ``L_k`` at ``p_k`` and applies ``T_{L_k}``
    ``l_k`` times.  Iterates decrease monotonically toward ``p*``.  For the
    elementwise-bound class the result reports ``k_bar``, the first index from
    which every greedy gain lies in the optimal set.
    """
    lengths = iter(OpiSchedule.of(schedule))
    if p0 is None:
        p = find_opi_seed(problem, margin)
    else:
        p = np.array(p0, dtype=float).reshape(-1)
        if p.size != problem.n:
            raise ValueError(f"p0 has length {p.size}, expected {problem.n}")
    Tp = bellman.apply_T(p, problem)
    if np.any(Tp > p + _seed_tolerance(p)):
        i = int(np.argmax(Tp - p))
        raise SeedError(f"seed violates p0 >= T(p0) at index {i}: p0={p[i]!r}, T(p0)={Tp[i]!r}")

    is_abs = isinstance(problem, AbsProblem)
    history = []
    iterates = [p.copy()] if record_iterates else None
    gains = [] if record_iterates else None
    sign_log = []
    for k in range(max_iter + 1):
        policy = bellman.greedy(p, problem)
        q = bellman.apply_T_L(p, policy, problem)  # equals T(p)
        res = _sup(q - p)
        history.append((k, res))
        if is_abs:
            sign_log.append(bellman.greedy_signs(p, problem))
        if record_iterates:
            gains.append(policy.L)
        if res <= tol:
            extra = {}
            if is_abs:
                extra["k_bar"] = _first_optimal_index(problem, p, sign_log)
            if record_iterates:
                extra["iterates"] = iterates
                extra["gains"] = gains
            return _converged_result("opi", problem, p, k, history, res, margin, **extra)
        if k == max_iter:
            break
        for _ in range(next(lengths) - 1):
            q = bellman.apply_T_L(q, policy, problem)
        p = q
        if record_iterates:
            iterates.append(p.copy())
    extra = {"iterates": iterates, "gains": gains} if record_iterates else {}
    return SolveResult("opi", Status.ITER_LIMIT, p_star=None, iterations=max_iter, history=history,
                       certificate=history[-1][1], message=f"no convergence in {max_iter} iterations", extra=extra)


def _first_optimal_index(problem: AbsProblem, p_star, sign_log) -> int:
    optimal = bellman.optimal_policy_set_abs(p_star, problem)
    k_bar = len(sign_log)
    for k in range(len(sign_log) - 1, -1, -1):
        if not optimal.contains(-sign_log[k][:, None] * problem.E):
            break
        k_bar = k
    return k_bar


# ---------------------------------------------------------------- seeds


def find_initial_policy(problem: Problem, margin: float = DEFAULT_MARGIN, max_iter: int = DEFAULT_MAX_ITER) -> Policy:
    """First greedy gain along value iteration from zero whose closed loop is stable."""
    p = np.zeros(problem.n)
    last = None
    for k in range(max_iter + 1):
        policy = bellman.greedy(p, problem)
        if last is None or not np.array_equal(policy.L, last):
            last = policy.L
            try:
                certified, cert = certify(problem, policy, margin)
            except SpectralError:
                cert = None
            if cert is not None and cert.stable:
                return certified
        q = bellman.apply_T(p, problem)
        res = _sup(q - p)
        if res <= DEFAULT_TOL * max(1.0, _sup(p)):
            break
        if _sup(q) > DIVERGENCE_CAP or not np.all(np.isfinite(q)):
            break
        p = q
    raise NoStabilizingPolicyError(
        "value iteration found no greedy gain with a stable closed loop; J* appears infinite"
    )


def find_opi_seed(problem: Problem, margin: float = DEFAULT_MARGIN) -> np.ndarray:
    """Cost of a stabilizing gain; satisfies ``T(p) <= T_L(p) = p``."""
    return policy_evaluation(problem, find_initial_policy(problem, margin), margin)


# ---------------------------------------------------------------- dispatch


METHODS = ("vi", "pi", "opi", "lp")


def solve(problem: Problem, method: str = "vi", tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
          schedule=5, margin: float = DEFAULT_MARGIN) -> SolveResult:
    """Run one method; an unstabilizable instance comes back as ``Status.DIVERGED``."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {', '.join(METHODS)}")
    try:
        if method == "vi":
            return value_iteration(problem, tol=tol, max_iter=max_iter, margin=margin)
        if method == "pi":
            return policy_iteration(problem, tol=tol, max_iter=min(max_iter, 10_000), margin=margin)
        if method == "opi":
            return optimistic_pi(problem, schedule=schedule, tol=tol, max_iter=max_iter, margin=margin)
    except NoStabilizingPolicyError as exc:
        return SolveResult(method, Status.DIVERGED, message=str(exc))
    from .lp import solve_via_lp

    return solve_via_lp(problem, margin=margin)

"""Bellman operators restricted to linear costs ``x'p`` and linear gains ``u = Lx``.

Elementwise-bound class::

    G(p)   = s + A'p - E'|r + B'p|
    G_L(p) = s + L'r + (A + BL)'p          for |L| <= E

Norm-bound class::

    F(p)   = s + A'p - N' ||r + B'p||_*
    F_L(p) = s + L'r + (A + BL)'p          for L = -wN, ||w|| <= 1

The operators take any finite ``p``, including negative ones.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasiblePolicyError
from .model import AbsProblem, NormKind, NormProblem, Policy, Problem, dual_norm, gain_matrix, vector_norm

FEAS_TOL = 1e-12


def sign(x) -> np.ndarray:
    """Sign with ``sign(0) = +1``."""
    return np.where(np.asarray(x, dtype=float) >= 0, 1.0, -1.0)


def _vec(p, n: int) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size != n:
        raise ValueError(f"cost vector has length {p.size}, expected {n}")
    return p


def _affine(p: np.ndarray, L: np.ndarray, problem: Problem) -> np.ndarray:
    return problem.s + L.T @ problem.r + (problem.A + problem.B @ L).T @ p


# ---------------------------------------------------------------- feasibility


def abs_gain_feasible(L, problem: AbsProblem, tol: float = FEAS_TOL) -> bool:
    L = gain_matrix(L)
    if L.shape != problem.E.shape:
        return False
    return bool(np.all(np.abs(L) <= problem.E + tol))


def norm_gain_direction(L, problem: NormProblem, tol: float = FEAS_TOL):
    """Recover ``w`` with ``L = -wN`` or return None if L is not of that form."""
    L = gain_matrix(L)
    if L.shape != (problem.m, problem.n):
        return None
    N = problem.N
    scale = max(1.0, float(np.max(np.abs(L))) if L.size else 1.0)
    if not np.any(N > 0):
        return np.zeros(problem.m) if np.all(np.abs(L) <= tol * scale) else None
    j = int(np.argmax(N))
    w = -L[:, j] / N[j]
    if np.max(np.abs(L + np.outer(w, N))) > tol * scale:
        return None
    return w


def norm_gain_feasible(L, problem: NormProblem, tol: float = FEAS_TOL) -> bool:
    w = norm_gain_direction(L, problem, tol)
    return w is not None and vector_norm(w, problem.norm) <= 1.0 + 1e-9


def gain_feasible(L, problem: Problem, tol: float = FEAS_TOL) -> bool:
    if isinstance(problem, AbsProblem):
        return abs_gain_feasible(L, problem, tol)
    return norm_gain_feasible(L, problem, tol)


def make_policy(L, problem: Problem) -> Policy:
    if isinstance(L, Policy):
        return L
    L = gain_matrix(L)
    w = norm_gain_direction(L, problem) if isinstance(problem, NormProblem) else None
    return Policy(L=L, feasible=gain_feasible(L, problem), w=w)


def _require_feasible(L, problem: Problem) -> np.ndarray:
    M = gain_matrix(L)
    if not gain_feasible(M, problem):
        raise InfeasiblePolicyError(f"gain {M.tolist()} is not feasible for this {problem.kind}-class problem")
    return M


# ---------------------------------------------------------------- abs class


def apply_G(p, problem: AbsProblem) -> np.ndarray:
    p = _vec(p, problem.n)
    return problem.s + problem.A.T @ p - problem.E.T @ np.abs(problem.r + problem.B.T @ p)


def apply_G_L(p, L, problem: AbsProblem) -> np.ndarray:
    L = _require_feasible(L, problem)
    return _affine(_vec(p, problem.n), L, problem)


def greedy_signs(p, problem: AbsProblem) -> np.ndarray:
    return sign(problem.r + problem.B.T @ _vec(p, problem.n))


def greedy_abs(p, problem: AbsProblem) -> Policy:
    """Row i of the gain is ``-sign(r_i + b_i'p) E_i``; attains ``G_L(p) = G(p)``."""
    sigma = greedy_signs(p, problem)
    return Policy(L=-sigma[:, None] * problem.E, feasible=True)


@dataclass(frozen=True)
class OptimalPolicySet:
    """Optimal linear gains at ``p*``: rows outside ``free_rows`` are pinned to ``L_bar``.

    Rows in ``free_rows`` (where ``r_i + b_i'p* = 0``) may be anything with
    ``|L_i| <= E_i``.
    """

    L_bar: np.ndarray
    free_rows: tuple
    E: np.ndarray

    def contains(self, L, tol: float = 1e-9) -> bool:
        L = gain_matrix(L)
        if L.shape != self.E.shape or np.any(np.abs(L) > self.E + tol):
            return False
        pinned = [i for i in range(self.E.shape[0]) if i not in self.free_rows]
        return bool(np.all(np.abs(L[pinned] - self.L_bar[pinned]) <= tol))


def optimal_policy_set_abs(p_star, problem: AbsProblem, tol: float = 1e-9) -> OptimalPolicySet:
    v = problem.r + problem.B.T @ _vec(p_star, problem.n)
    free = tuple(int(i) for i in np.flatnonzero(np.abs(v) <= tol))
    return OptimalPolicySet(greedy_abs(p_star, problem).L, free, problem.E)


# ---------------------------------------------------------------- norm class


@dataclass(frozen=True)
class SubgradientChoice:
    w: np.ndarray
    on_boundary: bool


def subgradient(v, norm: NormKind) -> SubgradientChoice:
    """A deterministic element of the subdifferential of ``||.||_*`` at ``v``.

    ``norm`` is the constraint norm, so the returned ``w`` has ``||w|| = 1`` and
    ``w'v = ||v||_*`` when ``v != 0``, and ``w = 0`` when ``v = 0``.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    norm = NormKind.parse(norm)
    if not np.any(v):
        return SubgradientChoice(np.zeros_like(v), False)
    if norm is NormKind.TWO:
        u = v / np.max(np.abs(v))  # rescale first so subnormal v does not underflow
        w = u / np.linalg.norm(u)
    elif norm is NormKind.ONE:
        # dual is max-abs: unit coordinate at the first maximizing index
        i = int(np.argmax(np.abs(v)))
        w = np.zeros_like(v)
        w[i] = sign(v[i])
    else:
        w = sign(v)
    return SubgradientChoice(w, True)


def apply_F(p, problem: NormProblem) -> np.ndarray:
    p = _vec(p, problem.n)
    return problem.s + problem.A.T @ p - problem.N * dual_norm(problem.r + problem.B.T @ p, problem.norm)


def apply_F_L(p, L, problem: NormProblem) -> np.ndarray:
    L = _require_feasible(L, problem)
    return _affine(_vec(p, problem.n), L, problem)


def greedy_norm(p, problem: NormProblem) -> Policy:
    """``L = -wN`` with ``w`` from :func:`subgradient` at ``r + B'p``."""
    w = subgradient(problem.r + problem.B.T @ _vec(p, problem.n), problem.norm).w
    return Policy(L=-np.outer(w, problem.N), feasible=True, w=w)


def in_optimal_set_norm(L, p_star, problem: NormProblem, tol: float = 1e-9) -> bool:
    """Membership of ``L`` in ``{-wN : w in S(r + B'p*)}`` up to ``tol``."""
    w = norm_gain_direction(L, problem)
    if w is None:
        return False
    v = problem.r + problem.B.T @ _vec(p_star, problem.n)
    size = vector_norm(w, problem.norm)
    if np.max(np.abs(v)) <= tol:
        return size <= 1.0 + tol
    return abs(size - 1.0) <= tol and abs(float(w @ v) - dual_norm(v, problem.norm)) <= tol * max(
        1.0, dual_norm(v, problem.norm)
    )


# ---------------------------------------------------------------- dispatch


def apply_T(p, problem: Problem) -> np.ndarray:
    """``G`` or ``F`` depending on the problem class."""
    if isinstance(problem, AbsProblem):
        return apply_G(p, problem)
    return apply_F(p, problem)


def apply_T_L(p, L, problem: Problem) -> np.ndarray:
    if isinstance(problem, AbsProblem):
        return apply_G_L(p, L, problem)
    return apply_F_L(p, L, problem)


def greedy(p, problem: Problem) -> Policy:
    if isinstance(problem, AbsProblem):
        return greedy_abs(p, problem)
    return greedy_norm(p, problem)


def sample_bellman(problem: Problem, lo: float, hi: float, steps: int) -> list:
    """Rows ``(t, p..., T(p)...)`` along ``p = t * 1`` for ``t`` in ``[lo, hi]``."""
    rows = []
    ones = np.ones(problem.n)
    for t in np.linspace(lo, hi, steps):
        p = t * ones
        rows.append([float(t), *p.tolist(), *apply_T(p, problem).tolist()])
    return rows

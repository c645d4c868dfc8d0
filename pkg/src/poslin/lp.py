"""Dense two-phase simplex and the linear programs for both problem classes.

Elementwise-bound class, variables ``(p, gamma)``::

    max 1'p  s.t.  (I - A')p + E'gamma = s,  +-(r + B'p) <= gamma,  p, gamma >= 0

Norm-bound class (1- and inf-norm constraints), variables ``(p, gamma[, t])``::

    max 1'p  s.t.  (I - A')p + N'gamma <= s,  ||r + B'p||_* <= gamma,  p, gamma >= 0

A finite optimum certifies finite optimal cost; an infeasible or unbounded
program means the optimal cost is infinite somewhere.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import bellman
from .errors import OutOfScopeError, ResidualCheckError
from .model import AbsProblem, NormKind, NormProblem, Problem
from .solvers import SolveResult, Status, certify
from .spectral import DEFAULT_MARGIN

PIVOT_TOL = 1e-9
RESIDUAL_TOL = 1e-8


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    UNBOUNDED = "unbounded"
    INFEASIBLE = "infeasible"


@dataclass
class LinearProgram:
    """``max c'x`` subject to ``A_eq x = b_eq``, ``A_le x <= b_le``.

    Variables are nonnegative unless flagged in ``free``.
    """

    c: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    A_le: Optional[np.ndarray] = None
    b_le: Optional[np.ndarray] = None
    free: Optional[np.ndarray] = None
    names: list = field(default_factory=list)

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        nv = self.c.size
        self.A_eq, self.b_eq = _rows(self.A_eq, self.b_eq, nv, "eq")
        self.A_le, self.b_le = _rows(self.A_le, self.b_le, nv, "le")
        self.free = np.zeros(nv, dtype=bool) if self.free is None else np.asarray(self.free, dtype=bool)
        if self.free.shape != (nv,):
            raise ValueError("free mask must have one entry per variable")
        for arr in (self.c, self.A_eq, self.b_eq, self.A_le, self.b_le):
            if not np.all(np.isfinite(arr)):
                raise ValueError("linear program data must be finite")
        if not self.names:
            self.names = [f"x{j}" for j in range(nv)]

    @property
    def num_vars(self) -> int:
        return self.c.size

    def dump(self) -> str:
        """Human-readable listing of the program."""

        def expr(row):
            terms = [f"{v:+.12g}*{self.names[j]}" for j, v in enumerate(row) if v != 0]
            return " ".join(terms) if terms else "0"

        lines = [f"maximize {expr(self.c)}", "subject to"]
        lines += [f"  {expr(a)} = {b:.12g}" for a, b in zip(self.A_eq, self.b_eq)]
        lines += [f"  {expr(a)} <= {b:.12g}" for a, b in zip(self.A_le, self.b_le)]
        bounded = [nm for nm, f in zip(self.names, self.free) if not f]
        if bounded:
            lines.append(f"  {', '.join(bounded)} >= 0")
        return "\n".join(lines)


def _rows(A, b, nv, what):
    if A is None:
        return np.zeros((0, nv)), np.zeros(0)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[0] == 0:
        A = A.reshape(0, nv)
    if A.shape != (b.size, nv):
        raise ValueError(f"{what} constraints: matrix {A.shape} does not match rhs {b.shape} / {nv} vars")
    return A, b


@dataclass
class LpOutcome:
    status: LpStatus
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    basis: Optional[list] = None
    pivots: int = 0


def _pivot(T: np.ndarray, row: int, col: int) -> None:
    T[row] /= T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0.0
    T -= np.outer(factors, T[row])


def _simplex(T: np.ndarray, basis: list, ncols: int, tol: float, max_pivots: int) -> tuple[str, int]:
    """Minimize over a canonical tableau using Bland's rule.

    The last row holds reduced costs, the last column the right-hand side.
    Only the first ``ncols`` columns may enter.
    """
    pivots = 0
    while True:
        rc = T[-1, :ncols]
        entering = np.flatnonzero(rc < -tol)
        if entering.size == 0:
            return "optimal", pivots
        col = int(entering[0])
        column = T[:-1, col]
        candidates = np.flatnonzero(column > tol)
        if candidates.size == 0:
            return "unbounded", pivots
        ratios = T[candidates, -1] / column[candidates]
        best = ratios.min()
        ties = candidates[ratios <= best + tol * max(1.0, abs(best))]
        row = int(min(ties, key=lambda i: basis[i]))
        _pivot(T, row, col)
        basis[row] = col
        pivots += 1
        if pivots > max_pivots:
            raise RuntimeError(f"simplex exceeded {max_pivots} pivots")


def simplex_solve(lp: LinearProgram, tol: float = PIVOT_TOL) -> LpOutcome:
    """Two-phase primal simplex with Bland's anti-cycling rule on a dense tableau."""
    nv = lp.num_vars
    # Free variables are split as x = x+ - x-.
    free_idx = np.flatnonzero(lp.free)
    split = np.zeros((nv, nv + free_idx.size))
    split[:, :nv] = np.eye(nv)
    for k, j in enumerate(free_idx):
        split[j, nv + k] = -1.0
    n_struct = split.shape[1]

    A_eq = lp.A_eq @ split
    A_le = lp.A_le @ split
    m_eq, m_le = A_eq.shape[0], A_le.shape[0]
    m = m_eq + m_le
    # Columns: structural | slacks (one per <= row) | artificials (one per row)
    n_slack = m_le
    A = np.zeros((m, n_struct + n_slack))
    A[:m_eq, :n_struct] = A_eq
    A[m_eq:, :n_struct] = A_le
    A[m_eq:, n_struct:] = np.eye(m_le)
    b = np.concatenate([lp.b_eq, lp.b_le])
    neg = b < 0
    A[neg] *= -1.0
    b = np.where(neg, -b, b)

    n_real = n_struct + n_slack
    T = np.zeros((m + 1, n_real + m + 1))
    T[:m, :n_real] = A
    T[:m, n_real:n_real + m] = np.eye(m)
    T[:m, -1] = b
    basis = list(range(n_real, n_real + m))
    # Phase 1: minimize the sum of artificials.
    T[-1, :n_real] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    max_pivots = 50_000 + 200 * (m + n_real)
    _, pivots = _simplex(T, basis, n_real + m, tol, max_pivots)
    if -T[-1, -1] > tol * max(1.0, float(np.max(b)) if m else 1.0):
        return LpOutcome(LpStatus.INFEASIBLE, pivots=pivots)

    # Drive remaining artificials out of the basis or drop their redundant rows.
    keep_rows = []
    for i in range(m):
        if basis[i] >= n_real:
            nz = np.flatnonzero(np.abs(T[i, :n_real]) > tol)
            if nz.size:
                _pivot(T, i, int(nz[0]))
                basis[i] = int(nz[0])
                pivots += 1
                keep_rows.append(i)
        else:
            keep_rows.append(i)
    T = np.vstack([T[keep_rows][:, list(range(n_real)) + [T.shape[1] - 1]], np.zeros((1, n_real + 1))])
    basis = [basis[i] for i in keep_rows]

    # Phase 2: minimize -c'x.
    cost = np.zeros(n_real)
    cost[:n_struct] = -(lp.c @ split)
    T[-1, :n_real] = cost
    T[-1, -1] = 0.0
    for i, j in enumerate(basis):
        if cost[j] != 0.0:
            T[-1] -= cost[j] * T[i]
    state, more = _simplex(T, basis, n_real, tol, max_pivots)
    pivots += more
    if state == "unbounded":
        return LpOutcome(LpStatus.UNBOUNDED, basis=list(basis), pivots=pivots)
    z = np.zeros(n_real)
    for i, j in enumerate(basis):
        z[j] = T[i, -1]
    x = split @ z[:n_struct]
    return LpOutcome(LpStatus.OPTIMAL, x=x, value=float(lp.c @ x), basis=list(basis), pivots=pivots)


# ---------------------------------------------------------------- problem programs


def build_abs_lp(problem: AbsProblem) -> LinearProgram:
    n, m = problem.n, problem.m
    A, B, E, s, r = problem.A, problem.B, problem.E, problem.s, problem.r
    c = np.concatenate([np.ones(n), np.zeros(m)])
    A_eq = np.hstack([np.eye(n) - A.T, E.T])
    A_le = np.vstack([
        np.hstack([B.T, -np.eye(m)]),  # r + B'p <= gamma
        np.hstack([-B.T, -np.eye(m)]),  # -(r + B'p) <= gamma
    ])
    b_le = np.concatenate([-r, r])
    names = [f"p{i}" for i in range(n)] + [f"gamma{j}" for j in range(m)]
    return LinearProgram(c=c, A_eq=A_eq, b_eq=s.copy(), A_le=A_le, b_le=b_le, names=names)


def norm_program_supported(problem: NormProblem) -> bool:
    # A Euclidean dual-norm bound is a cone constraint unless m = 1,
    # where every norm reduces to the absolute value.
    return problem.norm is not NormKind.TWO or problem.m == 1


def build_norm_program(problem: NormProblem) -> LinearProgram:
    if not norm_program_supported(problem):
        raise OutOfScopeError(
            "the Euclidean-norm program is a second-order cone program; use value or policy iteration"
        )
    n, m = problem.n, problem.m
    A, B, N, s, r = problem.A, problem.B, problem.N, problem.s, problem.r
    main = np.hstack([np.eye(n) - A.T, N[:, None]])  # (I - A')p + N'gamma <= s
    names = [f"p{i}" for i in range(n)] + ["gamma"]
    if problem.norm is NormKind.INF and m > 1:
        # sum-abs dual: +-(r + B'p) <= t, 1't <= gamma
        nv = n + 1 + m
        rows = [np.hstack([main, np.zeros((n, m))])]
        rows.append(np.hstack([B.T, np.zeros((m, 1)), -np.eye(m)]))
        rows.append(np.hstack([-B.T, np.zeros((m, 1)), -np.eye(m)]))
        rows.append(np.hstack([np.zeros((1, n)), [[-1.0]], np.ones((1, m))]))
        b_le = np.concatenate([s, -r, r, [0.0]])
        names += [f"t{j}" for j in range(m)]
    else:
        # max-abs dual (or m = 1): +-(r_j + b_j'p) <= gamma for every j
        nv = n + 1
        rows = [main, np.hstack([B.T, -np.ones((m, 1))]), np.hstack([-B.T, -np.ones((m, 1))])]
        b_le = np.concatenate([s, -r, r])
    c = np.zeros(nv)
    c[:n] = 1.0
    return LinearProgram(c=c, A_le=np.vstack(rows), b_le=b_le, names=names)


def build_program(problem: Problem) -> LinearProgram:
    if isinstance(problem, AbsProblem):
        return build_abs_lp(problem)
    return build_norm_program(problem)


def solve_via_lp(problem: Problem, margin: float = DEFAULT_MARGIN, residual_tol: float = RESIDUAL_TOL) -> SolveResult:
    """Solve the program; Infeasible or Unbounded maps to an infinite-cost verdict."""
    program = build_program(problem)
    outcome = simplex_solve(program)
    extra = {"lp_status": outcome.status.value, "lp_pivots": outcome.pivots}
    if outcome.status is not LpStatus.OPTIMAL:
        return SolveResult("lp", Status.DIVERGED, message=f"program is {outcome.status.value}: J* is infinite",
                           extra=extra)
    n = problem.n
    p = np.maximum(outcome.x[:n], 0.0)
    extra["lp_value"] = outcome.value
    extra["lp_solution"] = outcome.x.tolist()
    residual = float(np.max(np.abs(bellman.apply_T(p, problem) - p)))
    if residual > residual_tol * max(1.0, float(np.max(np.abs(p)))):
        raise ResidualCheckError(f"LP optimum is not a Bellman fixed point (residual {residual:.3g})")
    policy, cert = certify(problem, bellman.greedy(p, problem), margin)
    return SolveResult("lp", Status.CONVERGED, p_star=p, policy=policy, iterations=outcome.pivots,
                       certificate=residual, spectral=cert, extra=extra)

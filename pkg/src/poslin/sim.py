"""Closed-loop rollouts and trajectory-based audits of certified costs."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from . import bellman
from .errors import InfeasiblePolicyError, UnstablePolicyError
from .model import AbsProblem, Problem, gain_matrix, vector_norm
from .spectral import spectral_radius

MAX_AUDIT_HORIZON = 1_000_000


@dataclass(frozen=True)
class Trajectory:
    states: np.ndarray  # (horizon + 1, n): x_0 .. x_H
    controls: np.ndarray  # (horizon, m)
    stage_costs: np.ndarray  # (horizon,)

    @property
    def total(self) -> float:
        return float(np.sum(self.stage_costs))

    @property
    def horizon(self) -> int:
        return len(self.stage_costs)

    def to_csv(self) -> str:
        n = self.states.shape[1]
        m = self.controls.shape[1]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["k", *[f"x{i}" for i in range(n)], *[f"u{j}" for j in range(m)], "stage_cost"])
        for k in range(self.horizon):
            writer.writerow([k, *map(repr, self.states[k].tolist()), *map(repr, self.controls[k].tolist()),
                             repr(float(self.stage_costs[k]))])
        return buf.getvalue()


def rollout(problem: Problem, L, x0, horizon: int) -> Trajectory:
    """Simulate ``x_{k+1} = (A + BL) x_k`` for ``horizon`` steps."""
    L = gain_matrix(L)
    if not bellman.gain_feasible(L, problem):
        raise InfeasiblePolicyError(f"gain {L.tolist()} is not feasible")
    x = np.asarray(x0, dtype=float).reshape(-1)
    if x.size != problem.n:
        raise ValueError(f"x0 has length {x.size}, expected {problem.n}")
    if np.any(x < 0):
        raise ValueError("x0 must be elementwise nonnegative")
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    states = np.empty((horizon + 1, problem.n))
    controls = np.empty((horizon, problem.m))
    costs = np.empty(horizon)
    states[0] = x
    for k in range(horizon):
        u = L @ x
        controls[k] = u
        costs[k] = problem.s @ x + problem.r @ u
        x = problem.A @ x + problem.B @ u
        states[k + 1] = x
    return Trajectory(states, controls, costs)


def control_feasible(problem: Problem, x, u, tol: float = 1e-12) -> bool:
    if isinstance(problem, AbsProblem):
        return bool(np.all(np.abs(u) <= problem.E @ x + tol))
    return vector_norm(u, problem.norm) <= float(problem.N @ x) + tol


@dataclass(frozen=True)
class AuditReport:
    passed: bool
    total: float
    tail: float
    predicted: float
    gap: float
    horizon: int
    lower_bound_holds: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def default_audit_horizon(rho: float) -> int:
    return int(min(MAX_AUDIT_HORIZON, 10 * math.ceil(1.0 / (1.0 - rho))))


def audit_cost(problem: Problem, L, x0, p_star, horizon: int | None = None, rel_tol: float = 1e-9) -> AuditReport:
    """Compare ``rollout total + p*'x_H`` with ``x0'p*``.

    The identity is exact for an optimal gain.  For any feasible gain the
    left side can only be larger, which is reported as ``lower_bound_holds``.
    """
    L = gain_matrix(L)
    cert = spectral_radius(problem.A + problem.B @ L)
    if not cert.stable:
        raise UnstablePolicyError(f"closed loop has spectral radius {cert.rho:.12g}")
    if horizon is None:
        horizon = default_audit_horizon(cert.rho)
    p_star = np.asarray(p_star, dtype=float)
    traj = rollout(problem, L, x0, horizon)
    predicted = float(traj.states[0] @ p_star)
    tail = float(traj.states[-1] @ p_star)
    total = traj.total
    gap = total + tail - predicted
    slack = rel_tol * abs(predicted)
    return AuditReport(
        passed=abs(gap) <= slack,
        total=total,
        tail=tail,
        predicted=predicted,
        gap=gap,
        horizon=horizon,
        lower_bound_holds=gap >= -slack,
    )

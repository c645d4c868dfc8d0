"""Standing-assumption checks with per-condition diagnostics.

Each report lists the sign conditions on the data, the two dominance
inequalities, and the strict observability condition

    v' (I + M + ... + M^(n-1)) > 0,

where ``v = s - E'|r|`` and ``M = A - |B|E`` in the elementwise-bound class,
and ``v = s - N'||r||_*`` and ``M = A - d N`` (``d_i = ||B_i'||_*``) in the
norm-bound class.  Failures are reported, never raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .model import AbsProblem, NormProblem, Problem, dual_norm
from .spectral import neumann_sum

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    witness: Optional[dict] = None

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "witness": self.witness}


@dataclass(frozen=True)
class ValidationReport:
    checks: list = field(default_factory=list)
    observability_vector: Optional[np.ndarray] = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed_checks(self) -> list:
        return [c.name for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "observability_vector": None
            if self.observability_vector is None
            else self.observability_vector.tolist(),
        }


def _ge_check(name: str, values: np.ndarray, tol: float) -> Check:
    """Pass iff every entry of ``values`` is >= -tol; witness is the worst entry."""
    values = np.asarray(values, dtype=float)
    if values.size == 0 or values.min() >= -tol:
        return Check(name, True)
    idx = np.unravel_index(np.argmin(values), values.shape)
    return Check(name, False, {"index": [int(i) for i in idx], "value": float(values[idx])})


def _observability_check(v: np.ndarray, M: np.ndarray, tol: float) -> tuple[Check, np.ndarray]:
    n = v.size
    ob = neumann_sum(v, M, n)
    if ob.min() > tol:
        return Check("observability", True), ob
    i = int(np.argmin(ob))
    return Check("observability", False, {"index": [i], "value": float(ob[i])}), ob


def abs_closed_loop_floor(problem: AbsProblem) -> np.ndarray:
    """``A - |B|E``, the elementwise smallest closed loop over feasible gains."""
    return problem.A - np.abs(problem.B) @ problem.E


def abs_cost_floor(problem: AbsProblem) -> np.ndarray:
    """``s - E'|r|``."""
    return problem.s - problem.E.T @ np.abs(problem.r)


def norm_closed_loop_floor(problem: NormProblem) -> np.ndarray:
    return problem.A - np.outer(problem.row_dual_norms(), problem.N)


def norm_cost_floor(problem: NormProblem) -> np.ndarray:
    return problem.s - problem.N * dual_norm(problem.r, problem.norm)


def check_abs(problem: AbsProblem, tol: float = DEFAULT_TOL) -> ValidationReport:
    M = abs_closed_loop_floor(problem)
    v = abs_cost_floor(problem)
    checks = [
        _ge_check("E_nonnegative", problem.E, tol),
        _ge_check("A_dominates_BE", M, tol),
        _ge_check("s_dominates_Er", v, tol),
    ]
    ob_check, ob = _observability_check(v, M, tol)
    checks.append(ob_check)
    return ValidationReport(checks, ob)


def check_norm(problem: NormProblem, tol: float = DEFAULT_TOL) -> ValidationReport:
    M = norm_closed_loop_floor(problem)
    v = norm_cost_floor(problem)
    checks = [
        _ge_check("N_nonnegative", problem.N, tol),
        _ge_check("A_dominates_BN", M, tol),
        _ge_check("s_dominates_Nr", v, tol),
    ]
    ob_check, ob = _observability_check(v, M, tol)
    checks.append(ob_check)
    return ValidationReport(checks, ob)


def check(problem: Problem, tol: float = DEFAULT_TOL) -> ValidationReport:
    if isinstance(problem, AbsProblem):
        return check_abs(problem, tol)
    return check_norm(problem, tol)


def _require_nonnegative(name: str, a: Any) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise ValueError(f"{name} must be elementwise nonnegative")
    return a


def observability_horizon(v, M, max_len: int, tol: float = 0.0) -> Optional[int]:
    """Smallest ``l <= max_len`` with ``v'(I + M + ... + M^(l-1)) > tol``, else None.

    For nonnegative data, if no ``l <= n`` works then no ``l`` at all works.
    """
    v = _require_nonnegative("v", v)
    M = _require_nonnegative("M", np.atleast_2d(M))
    if M.shape != (v.size, v.size):
        raise ValueError(f"dimension mismatch: v has length {v.size}, M has shape {M.shape}")
    total = np.zeros_like(v)
    term = v.copy()
    for ell in range(1, max_len + 1):
        total += term
        if total.min() > tol:
            return ell
        term = term @ M
    return None


def is_irreducible(M) -> bool:
    """True iff ``I + M + ... + M^(n-1)`` is entrywise positive.

    By this formula the 1x1 zero matrix counts as irreducible.
    """
    M = _require_nonnegative("M", np.atleast_2d(M))
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("M must be square")
    total = np.zeros_like(M)
    term = np.eye(n)
    for _ in range(n):
        total += term
        term = term @ M
    return bool(total.min() > 0)

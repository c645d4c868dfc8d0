"""Exact dynamic programming for positive linear systems with linear stage costs."""

from .bellman import (
    apply_F,
    apply_F_L,
    apply_G,
    apply_G_L,
    apply_T,
    greedy,
    greedy_abs,
    greedy_norm,
    optimal_policy_set_abs,
    subgradient,
)
from .lp import build_abs_lp, build_norm_program, simplex_solve, solve_via_lp
from .model import AbsProblem, NormKind, NormProblem, Policy, abs_matrix, dual_norm, load_problem, parse_problem
from .sim import audit_cost, rollout
from .solvers import (
    SolveResult,
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
from .spectral import is_stable, neumann_sum, spectral_radius
from .validate import check, check_abs, check_norm, is_irreducible, observability_horizon

__version__ = "0.1.0"

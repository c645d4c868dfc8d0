"""Random instances that satisfy the standing assumptions and are stabilizable.

Used by the test-suite and the experiment scripts.  Stabilizability is
confirmed with ``numpy.linalg.eigvals`` on candidate gains, independently of
the power iteration in :mod:`poslin.spectral`.
"""

from __future__ import annotations

import itertools

import numpy as np

from .model import AbsProblem, NormKind, NormProblem, dual_norm, vector_norm
from .validate import check_abs, check_norm


def _rho(M) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(M))))


def random_abs_problem(rng: np.random.Generator, n: int, m: int, max_tries: int = 1000) -> AbsProblem:
    """Valid, stabilizable elementwise-bound instance.

    ``A = |B|E + D`` with a dense nonnegative ``D``; some sign-pattern gain
    ``L = -diag(sigma) E`` must give a stable closed loop, which for this class
    is equivalent to finite optimal cost.
    """
    for _ in range(max_tries):
        E = rng.uniform(0.0, 1.0 / m, (m, n)) * (rng.uniform(size=(m, n)) < 0.8)
        B = rng.normal(0.0, 0.4, (n, m))
        D = rng.uniform(0.0, 1.0, (n, n))
        D *= rng.uniform(0.2, 0.8) / _rho(D)
        A = np.abs(B) @ E + D
        r = rng.normal(0.0, 1.0, m)
        s = E.T @ np.abs(r) + rng.uniform(0.0, 1.0, n) * (rng.uniform(size=n) < 0.7)
        problem = AbsProblem(A=A, B=B, E=E, s=s, r=r)
        if not check_abs(problem).passed:
            continue
        if any(_rho(A - B @ (np.array(sig)[:, None] * E)) < 1 - 1e-6
               for sig in itertools.product((-1.0, 1.0), repeat=m)):
            return problem
    raise RuntimeError("could not generate a stabilizable instance")


def random_unit_vectors(rng: np.random.Generator, m: int, kind: NormKind, count: int) -> np.ndarray:
    W = rng.normal(size=(count, m))
    return np.array([w / vector_norm(w, kind) for w in W])


def random_norm_problem(rng: np.random.Generator, n: int, m: int, norm: NormKind,
                        max_tries: int = 1000) -> NormProblem:
    """Valid, stabilizable norm-bound instance (stability checked on sampled ``w``)."""
    norm = NormKind.parse(norm)
    for _ in range(max_tries):
        N = rng.uniform(0.0, 0.6 / m, n) * (rng.uniform(size=n) < 0.85)
        B = rng.normal(0.0, 0.5, (n, m))
        d = np.array([dual_norm(row, norm) for row in B])
        D = rng.uniform(0.0, 1.0, (n, n))
        D *= rng.uniform(0.2, 0.8) / _rho(D)
        A = np.outer(d, N) + D
        r = rng.normal(0.0, 1.0, m)
        s = N * dual_norm(r, norm) + rng.uniform(0.0, 1.0, n) * (rng.uniform(size=n) < 0.7)
        problem = NormProblem(A=A, B=B, N=N, s=s, r=r, norm=norm)
        if not check_norm(problem).passed:
            continue
        candidates = np.vstack([np.zeros((1, m)), random_unit_vectors(rng, m, norm, 64)])
        if any(_rho(A - B @ np.outer(w, N)) < 1 - 1e-6 for w in candidates):
            return problem
    raise RuntimeError("could not generate a stabilizable instance")

"""Perron root of nonnegative matrices and closed-loop stability.

A nonnegative matrix has a real dominant eigenvalue with a nonnegative
eigenvector, so plain power iteration suffices once the spectrum is shifted
by a small positive multiple of the identity.  The shift makes the Perron
root strictly dominant in modulus even for cyclic matrices such as
permutations, where the unshifted iteration would oscillate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SpectralError

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 50_000
DEFAULT_MARGIN = 1e-9
NEG_TOL = 1e-12
PLAIN_STEPS = 2000
MAX_SQUARINGS = 200


@dataclass(frozen=True)
class SpectralCertificate:
    rho: float
    eigvec: np.ndarray
    residual: float
    stable: bool
    iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "rho": self.rho,
            "eigvec": self.eigvec.tolist(),
            "residual": self.residual,
            "stable": self.stable,
            "iterations": self.iterations,
        }


def _nonnegative_square(M, what="M") -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise SpectralError(f"{what} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise SpectralError(f"{what} has non-finite entries")
    if np.any(M < -NEG_TOL):
        i, j = np.unravel_index(np.argmin(M), M.shape)
        raise SpectralError(f"{what} must be nonnegative; entry ({i},{j}) = {M[i, j]!r}")
    # Round-off negatives from forming A + BL are clipped.
    return np.maximum(M, 0.0)


def spectral_radius(
    M,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    margin: float = DEFAULT_MARGIN,
    shift: float | None = None,
) -> SpectralCertificate:
    """Dominant eigenvalue and Perron vector of a nonnegative square matrix.

    Iterates ``x <- (M + shift*I) x / ||.||_inf`` from the all-ones vector and
    stops once ``||Mx - rho x||_inf`` and the Collatz-Wielandt gap are both
    within ``tol * max(1, rho)``, with ``||x||_inf = 1``.
    Raises ``SpectralError`` on bad input or if ``max_iter`` is exhausted.
    """
    M = _nonnegative_square(M)
    n = M.shape[0]
    if not np.any(M):
        return SpectralCertificate(0.0, np.ones(n), 0.0, 0.0 < 1.0 - margin, 0)
    if shift is None:
        shift = 1e-3 * float(np.max(M.sum(axis=1)))
    x = np.ones(n)
    it = 0

    def measure(x):
        Mx = M @ x
        rho = float(np.max(Mx))
        residual = float(np.max(np.abs(Mx - rho * x)))
        # Collatz-Wielandt bracket: min and max of (Mx)_i / x_i enclose the
        # Perron root, and rho = max(Mx) sits inside it since ||x||_inf = 1.
        pos = x > 0
        ratios = Mx[pos] / x[pos]
        gap = float(np.max(ratios) - np.min(ratios))
        done = max(residual, gap) <= tol * max(1.0, rho)
        return rho, residual, done

    for it in range(1, min(max_iter, PLAIN_STEPS) + 1):
        y = M @ x + shift * x
        x = y / np.max(y)
        rho, residual, done = measure(x)
        if done:
            return SpectralCertificate(rho, x, residual, rho < 1.0 - margin, it)
    # A defective dominant eigenvalue (a Jordan block) makes both tests decay
    # only like 1/k.  Keep iterating the same map but double the number of
    # steps per round by squaring the normalized shifted matrix.
    P = M + shift * np.eye(n)
    P /= np.max(P)
    for _ in range(MAX_SQUARINGS):
        if it >= max_iter:
            break
        it += 1
        y = P @ x
        x = y / np.max(y)
        rho, residual, done = measure(x)
        if done:
            return SpectralCertificate(rho, x, residual, rho < 1.0 - margin, it)
        P = P @ P
        P /= np.max(P)
    raise SpectralError(
        f"power iteration did not converge in {it} steps (rho~{rho:.6g}, residual {residual:.3g})"
    )


def is_stable(M, margin: float = DEFAULT_MARGIN) -> bool:
    return spectral_radius(M, margin=margin).stable


def neumann_sum(v, M, length: int) -> np.ndarray:
    """Row vector ``v' (I + M + ... + M^(length-1))`` by multiply-accumulate."""
    v = np.asarray(v, dtype=float)
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape != (v.size, v.size):
        raise ValueError(f"dimension mismatch: v has length {v.size}, M has shape {M.shape}")
    total = np.zeros_like(v)
    term = v.copy()
    for _ in range(length):
        total += term
        term = term @ M
    return total

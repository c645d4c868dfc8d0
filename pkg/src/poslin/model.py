"""Problem data for the two control classes and the JSON instance format.

Two problem classes share dynamics x+ = Ax + Bu and stage cost s'x + r'u:

* ``AbsProblem``: elementwise bound ``|u| <= E x``
* ``NormProblem``: norm bound ``||u|| <= N x`` with ``||.||`` one of the 1, 2, inf norms

Matrices are plain float64 numpy arrays, frozen (non-writeable) once a
problem is constructed.  Parsing checks shapes and finiteness only; the
standing assumptions are checked separately by :mod:`poslin.validate`.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Any, Optional, Union

import numpy as np

from .errors import ProblemError


class NormKind(enum.Enum):
    ONE = "one"
    TWO = "two"
    INF = "inf"

    @property
    def dual(self) -> "NormKind":
        return _DUAL[self]

    @classmethod
    def parse(cls, name: Union[str, "NormKind"]) -> "NormKind":
        if isinstance(name, NormKind):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ProblemError(f"unknown norm {name!r}; expected one of 'one', 'two', 'inf'") from None


_DUAL = {NormKind.ONE: NormKind.INF, NormKind.INF: NormKind.ONE, NormKind.TWO: NormKind.TWO}


def vector_norm(v, kind: NormKind) -> float:
    v = np.asarray(v, dtype=float)
    if kind is NormKind.ONE:
        return float(np.sum(np.abs(v)))
    if kind is NormKind.INF:
        return float(np.max(np.abs(v))) if v.size else 0.0
    return float(np.linalg.norm(v))


def dual_norm(v, kind: NormKind) -> float:
    """Dual of the constraint norm ``kind`` evaluated at ``v``.

    For a 1-norm constraint this is max-abs, for inf it is sum-abs, and the
    Euclidean norm is self-dual.
    """
    return vector_norm(v, NormKind.parse(kind).dual)


def abs_matrix(M) -> np.ndarray:
    return np.abs(np.asarray(M, dtype=float))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _as_matrix(name: str, value: Any) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"{name}: not a numeric array ({exc})") from None
    if arr.ndim != 2:
        raise ProblemError(f"{name}: expected a 2-D array of rows, got {arr.ndim}-D")
    if not np.all(np.isfinite(arr)):
        raise ProblemError(f"{name}: contains non-finite entries")
    return arr


def _as_vector(name: str, value: Any) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"{name}: not a numeric array ({exc})") from None
    if arr.ndim != 1:
        raise ProblemError(f"{name}: expected a flat array, got {arr.ndim}-D")
    if not np.all(np.isfinite(arr)):
        raise ProblemError(f"{name}: contains non-finite entries")
    return arr


def _check_shape(name: str, arr: np.ndarray, shape: tuple) -> None:
    if arr.shape != shape:
        raise ProblemError(f"{name}: dimension mismatch, expected shape {shape}, got {arr.shape}")


@dataclass(frozen=True, eq=False)
class AbsProblem:
    A: np.ndarray
    B: np.ndarray
    E: np.ndarray
    s: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        A = _as_matrix("A", self.A)
        B = _as_matrix("B", self.B)
        E = _as_matrix("E", self.E)
        s = _as_vector("s", self.s)
        r = _as_vector("r", self.r)
        n = A.shape[0]
        _check_shape("A", A, (n, n))
        m = B.shape[1]
        _check_shape("B", B, (n, m))
        _check_shape("E", E, (m, n))
        _check_shape("s", s, (n,))
        _check_shape("r", r, (m,))
        for k, v in dict(A=A, B=B, E=E, s=s, r=r).items():
            object.__setattr__(self, k, _frozen(v))

    kind = "abs"

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def to_dict(self) -> dict:
        return {
            "class": "abs",
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "E": self.E.tolist(),
            "s": self.s.tolist(),
            "r": self.r.tolist(),
        }


@dataclass(frozen=True, eq=False)
class NormProblem:
    A: np.ndarray
    B: np.ndarray
    N: np.ndarray
    s: np.ndarray
    r: np.ndarray
    norm: NormKind = NormKind.TWO

    def __post_init__(self):
        A = _as_matrix("A", self.A)
        B = _as_matrix("B", self.B)
        N = _as_vector("N", self.N)
        s = _as_vector("s", self.s)
        r = _as_vector("r", self.r)
        n = A.shape[0]
        _check_shape("A", A, (n, n))
        m = B.shape[1]
        _check_shape("B", B, (n, m))
        _check_shape("N", N, (n,))
        _check_shape("s", s, (n,))
        _check_shape("r", r, (m,))
        for k, v in dict(A=A, B=B, N=N, s=s, r=r).items():
            object.__setattr__(self, k, _frozen(v))
        object.__setattr__(self, "norm", NormKind.parse(self.norm))

    kind = "norm"

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def row_dual_norms(self) -> np.ndarray:
        """``[||B_1'||_*, ..., ||B_n'||_*]``, the dual norm of each row of B."""
        return np.array([dual_norm(row, self.norm) for row in self.B])

    def to_dict(self) -> dict:
        return {
            "class": "norm",
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "N": self.N.tolist(),
            "s": self.s.tolist(),
            "r": self.r.tolist(),
            "norm": self.norm.value,
        }


Problem = Union[AbsProblem, NormProblem]


@dataclass(frozen=True, eq=False)
class Policy:
    """Linear feedback ``u = L x``.

    ``w`` is set for norm-class gains of the form ``L = -w N``.
    ``spectral_radius`` is filled in once the closed loop has been certified.
    """

    L: np.ndarray
    feasible: bool
    spectral_radius: Optional[float] = None
    w: Optional[np.ndarray] = None
    stable: Optional[bool] = field(default=None)

    def __post_init__(self):
        object.__setattr__(self, "L", _frozen(np.atleast_2d(np.asarray(self.L, dtype=float))))
        if self.w is not None:
            object.__setattr__(self, "w", _frozen(self.w))

    def to_dict(self) -> dict:
        out = {
            "L": self.L.tolist(),
            "feasible": bool(self.feasible),
            "spectral_radius": self.spectral_radius,
            "stable": self.stable,
        }
        if self.w is not None:
            out["w"] = self.w.tolist()
        return out


def gain_matrix(L) -> np.ndarray:
    """Accept a ``Policy`` or anything array-like and return the gain as a 2-D array."""
    if isinstance(L, Policy):
        return np.asarray(L.L)
    return np.atleast_2d(np.asarray(L, dtype=float))


def problem_from_dict(data: dict) -> Problem:
    if not isinstance(data, dict):
        raise ProblemError("instance must be a JSON object")
    cls = data.get("class")
    required = {"abs": ("A", "B", "E", "s", "r"), "norm": ("A", "B", "N", "s", "r", "norm")}
    if cls not in required:
        raise ProblemError(f"'class' must be 'abs' or 'norm', got {cls!r}")
    missing = [k for k in required[cls] if k not in data]
    if missing:
        raise ProblemError(f"missing field(s) for class {cls!r}: {', '.join(missing)}")
    if cls == "abs":
        return AbsProblem(A=data["A"], B=data["B"], E=data["E"], s=data["s"], r=data["r"])
    return NormProblem(
        A=data["A"], B=data["B"], N=data["N"], s=data["s"], r=data["r"], norm=NormKind.parse(data["norm"])
    )


def parse_problem(text: str) -> Problem:
    """Parse a JSON instance.  Shapes are checked, assumptions are not."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"malformed JSON: {exc}") from None
    return problem_from_dict(data)


def load_problem(path) -> Problem:
    with open(path, encoding="utf-8") as fh:
        return parse_problem(fh.read())


def serialize_problem(problem: Problem) -> str:
    return json.dumps(problem.to_dict(), sort_keys=True)

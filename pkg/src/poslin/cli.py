"""Command-line front-end.

Exit codes: 0 success / converged, 1 usage, I/O or parse error, 2 failed
validation, 3 infinite-cost verdict, 4 iteration limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import bellman, lp, solvers, validate
from .errors import PoslinError
from .model import NormProblem, gain_matrix, load_problem
from .sim import rollout
from .spectral import spectral_radius

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_INFINITE = 3
EXIT_ITER_LIMIT = 4

STATUS_EXIT = {
    solvers.Status.CONVERGED: EXIT_OK,
    solvers.Status.DIVERGED: EXIT_INFINITE,
    solvers.Status.ITER_LIMIT: EXIT_ITER_LIMIT,
}


class UsageError(Exception):
    pass


def _emit(payload: dict, out) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _write_text(text: str, out) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _default_tol() -> float:
    env = os.environ.get("POSLIN_TOL")
    if env:
        try:
            return float(env)
        except ValueError:
            raise UsageError(f"POSLIN_TOL is not a number: {env!r}") from None
    return solvers.DEFAULT_TOL


def _load_gain(path, problem):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and isinstance(data.get("policy"), dict):
        data = data["policy"]
    if isinstance(data, dict):
        data = data.get("L")
    if data is None:
        raise UsageError(f"{path}: expected a JSON object with an 'L' gain matrix")
    L = gain_matrix(data)
    if L.shape != (problem.m, problem.n):
        raise UsageError(f"{path}: gain has shape {L.shape}, expected {(problem.m, problem.n)}")
    return L


def cmd_validate(args) -> int:
    problem = load_problem(args.input)
    report = validate.check(problem, args.tol_validate)
    _emit(report.to_dict(), args.output)
    return EXIT_OK if report.passed else EXIT_INVALID


def _parse_range(text: str):
    try:
        lo, hi, steps = text.split(":")
        return float(lo), float(hi), int(steps)
    except ValueError:
        raise UsageError(f"--sample-bellman expects lo:hi:steps, got {text!r}") from None


def cmd_solve(args) -> int:
    problem = load_problem(args.input)
    if args.sample_bellman:
        lo, hi, steps = _parse_range(args.sample_bellman)
        n = problem.n
        header = ["t", *[f"p{i}" for i in range(n)], *[f"Tp{i}" for i in range(n)]]
        rows = bellman.sample_bellman(problem, lo, hi, steps)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        _write_text(buf.getvalue(), args.output)
        return EXIT_OK

    report = validate.check(problem, args.tol_validate)
    if not report.passed and not args.force:
        print(f"instance fails validation ({', '.join(report.failed_checks())}); use --force to solve anyway",
              file=sys.stderr)
        _emit({"validation": report.to_dict()}, args.output)
        return EXIT_INVALID

    method = args.method
    if method == "lp" and isinstance(problem, NormProblem) and not lp.norm_program_supported(problem):
        print("warning: Euclidean-norm program is not a linear program; solving with value iteration",
              file=sys.stderr)
        method = "vi"
    if args.dump_lp and method == "lp":
        print(lp.build_program(problem).dump(), file=sys.stderr)

    tol = args.tol if args.tol is not None else _default_tol()
    result = solvers.solve(problem, method, tol=tol, max_iter=args.max_iter, schedule=args.schedule)
    payload = result.to_dict(include_history=args.history)
    payload.pop("iterates", None)
    payload["assumptions_verified"] = report.passed
    if not report.passed:
        payload["banner"] = "assumptions-not-verified"
    if result.status is solvers.Status.DIVERGED:
        payload["verdict"] = "J* infinite"
    _emit(payload, args.output)
    return STATUS_EXIT[result.status]


def _parse_x0(text: str, n: int) -> np.ndarray:
    try:
        x0 = np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"--x0 must be comma-separated reals, got {text!r}") from None
    if x0.size != n:
        raise UsageError(f"--x0 has {x0.size} entries, the instance has n = {n}")
    return x0


def cmd_simulate(args) -> int:
    problem = load_problem(args.input)
    x0 = _parse_x0(args.x0, problem.n)
    if args.policy:
        L = _load_gain(args.policy, problem)
    else:
        result = solvers.solve(problem, "vi", tol=_default_tol())
        if not result.converged:
            print(f"no optimal policy: {result.message}", file=sys.stderr)
            return STATUS_EXIT[result.status]
        L = result.policy.L
    traj = rollout(problem, L, x0, args.horizon)
    _write_text(traj.to_csv(), args.output)
    return EXIT_OK


def cmd_spectrum(args) -> int:
    problem = load_problem(args.input)
    M = problem.A
    if args.policy:
        M = problem.A + problem.B @ _load_gain(args.policy, problem)
    cert = spectral_radius(M)
    _emit(cert.to_dict(), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poslin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("input", help="problem instance (JSON)")
        p.add_argument("-o", "--output", help="write output here instead of stdout")
        p.add_argument("--tol-validate", type=float, default=validate.DEFAULT_TOL,
                       help="tolerance for the assumption checks (default %(default)g)")

    p = sub.add_parser("validate", help="check the standing assumptions")
    common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="compute p* and an optimal gain")
    common(p)
    p.add_argument("--method", choices=solvers.METHODS, default="vi")
    p.add_argument("--force", action="store_true", help="solve even if validation fails")
    p.add_argument("--tol", type=float, default=None, help="solver tolerance (default $POSLIN_TOL or 1e-10)")
    p.add_argument("--max-iter", type=int, default=solvers.DEFAULT_MAX_ITER)
    p.add_argument("--schedule", type=lambda t: [int(x) for x in t.split(",")], default=[5],
                   help="optimistic PI sweep lengths, comma-separated and cycled (default 5)")
    p.add_argument("--history", action="store_true", help="include the residual history")
    p.add_argument("--dump-lp", action="store_true", help="print the linear program to stderr")
    p.add_argument("--sample-bellman", metavar="LO:HI:STEPS",
                   help="emit (p, T(p)) samples along p = t*1 as CSV instead of solving")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="closed-loop rollout as CSV")
    common(p)
    p.add_argument("--x0", required=True, help="initial state, comma-separated")
    p.add_argument("--horizon", type=int, default=10)
    p.add_argument("--policy", help="JSON file with gain 'L' (default: optimal gain from value iteration)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="Perron root of A or of A + BL")
    common(p)
    p.add_argument("--policy", help="JSON file with gain 'L'")
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2, which is reserved for failed validation
        return EXIT_OK if exc.code in (0, None) else EXIT_ERROR
    try:
        return args.func(args)
    except (OSError, PoslinError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

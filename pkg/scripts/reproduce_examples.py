"""Solve every fixture with every method and print a summary table.

    python3 scripts/reproduce_examples.py [--fixtures DIR]
"""

import argparse
import pathlib
import time

from poslin import validate
from poslin.errors import PoslinError
from poslin.model import NormKind, NormProblem, load_problem
from poslin.solvers import METHODS, solve

ROOT = pathlib.Path(__file__).resolve().parent.parent


def run(path):
    problem = load_problem(path)
    report = validate.check(problem)
    failed = ",".join(report.failed_checks()) or "-"
    for method in METHODS:
        if method == "lp" and isinstance(problem, NormProblem) and problem.norm is NormKind.TWO and problem.m > 1:
            continue
        start = time.perf_counter()
        try:
            res = solve(problem, method)
            status = res.status.value
            p = "-" if res.p_star is None else " ".join(f"{v:.10g}" for v in res.p_star)
            rho = "-" if res.spectral is None else f"{res.spectral.rho:.6g}"
        except PoslinError as exc:
            status, p, rho = f"error ({type(exc).__name__})", "-", "-"
        ms = 1000 * (time.perf_counter() - start)
        print(f"{path.stem:16s} {failed:14s} {method:4s} {status:10s} {p:>16s} {rho:>9s} {ms:8.2f}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--fixtures", type=pathlib.Path, default=ROOT / "fixtures")
    args = parser.parse_args()
    print(f"{'instance':16s} {'failed checks':14s} {'meth':4s} {'status':10s} {'p*':>16s} {'rho':>9s} {'ms':>8s}")
    for path in sorted(args.fixtures.glob("*.json")):
        if "policy" in path.stem:
            continue
        run(path)


if __name__ == "__main__":
    main()

"""Sample the scalar Bellman maps of the one-dimensional fixtures as CSV.

Each file holds columns ``p,Tp`` so the fixed points show up as crossings of
the diagonal when plotted.  Example 2 has crossings at -1 and 5; Example 4
touches the diagonal only at 10; Example 3 follows it on all of [0, 10].

    python3 scripts/bellman_curves.py [--out DIR] [--steps N]
"""

import argparse
import csv
import pathlib

from poslin.bellman import sample_bellman
from poslin.model import load_problem

ROOT = pathlib.Path(__file__).resolve().parent.parent
CURVES = {
    "example2": (-3.0, 8.0),
    "example3": (-2.0, 20.0),
    "example4": (-2.0, 20.0),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=pathlib.Path, default=ROOT / "results")
    parser.add_argument("--steps", type=int, default=221)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for name, (lo, hi) in CURVES.items():
        problem = load_problem(ROOT / "fixtures" / f"{name}.json")
        rows = sample_bellman(problem, lo, hi, args.steps)
        path = args.out / f"{name}_bellman.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["p", "Tp"])
            writer.writerows([[row[1], row[2]] for row in rows])
        print(f"wrote {path} ({len(rows)} rows)")


if __name__ == "__main__":
    main()

"""How many improvement steps policy iteration needs on random instances.

Prints, for each input dimension m, the histogram of improvement counts
next to the 2^m ceiling, and compares wall time of the four methods.

    python3 scripts/pi_termination.py [--count 500] [--seed 0] [--max-n 6] [--max-m 4]
"""

import argparse
import collections
import time

import numpy as np

from poslin.generate import random_abs_problem
from poslin.solvers import METHODS, solve


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--count", type=int, default=500)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--max-n", type=int, default=6)
    parser.add_argument("--max-m", type=int, default=4)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    counts = collections.defaultdict(collections.Counter)
    timing = collections.defaultdict(float)
    worst_gap = 0.0
    for _ in range(args.count):
        n = int(rng.integers(1, args.max_n + 1))
        m = int(rng.integers(1, args.max_m + 1))
        problem = random_abs_problem(rng, n, m)
        results = {}
        for method in METHODS:
            start = time.perf_counter()
            results[method] = solve(problem, method)
            timing[method] += time.perf_counter() - start
        counts[m][results["pi"].iterations - 1] += 1
        ref = results["pi"].p_star
        worst_gap = max(worst_gap, *(float(np.max(np.abs(r.p_star - ref))) for r in results.values()))

    for m in sorted(counts):
        hist = " ".join(f"{k}:{v}" for k, v in sorted(counts[m].items()))
        print(f"m={m} ceiling 2^m={2 ** m:3d}  improvements {hist}")
    print("mean time per instance: " + "  ".join(f"{k} {1000 * v / args.count:.2f} ms" for k, v in timing.items()))
    print(f"largest disagreement with PI: {worst_gap:.3g}")


if __name__ == "__main__":
    main()

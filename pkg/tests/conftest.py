import functools
import pathlib
import sys

import numpy as np
import pytest

from poslin.generate import random_abs_problem, random_norm_problem
from poslin.model import AbsProblem, NormKind, NormProblem, load_problem

sys.path.insert(0, str(pathlib.Path(__file__).parent))

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def example1():
    return load_problem(FIXTURES / "example1.json")


@pytest.fixture
def example2():
    return load_problem(FIXTURES / "example2.json")


@pytest.fixture
def example3():
    return load_problem(FIXTURES / "example3.json")


@pytest.fixture
def example4():
    return load_problem(FIXTURES / "example4.json")


@pytest.fixture
def unstabilizable():
    return load_problem(FIXTURES / "unstabilizable.json")


@functools.lru_cache(maxsize=None)
def abs_instances(count=200, seed=20240, max_n=4, max_m=3):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        m = int(rng.integers(1, max_m + 1))
        out.append(random_abs_problem(rng, n, m))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def norm_instances(count=60, seed=777, max_n=4, max_m=3):
    rng = np.random.default_rng(seed)
    kinds = [NormKind.ONE, NormKind.TWO, NormKind.INF]
    out = []
    for i in range(count):
        n = int(rng.integers(1, max_n + 1))
        m = int(rng.integers(1, max_m + 1))
        out.append(random_norm_problem(rng, n, m, kinds[i % 3]))
    return tuple(out)


def example2_problem():
    return AbsProblem(A=[[1]], B=[[0.5]], E=[[1]], s=[1.5], r=[-1])


def example4_problem(norm="two", N=0.05):
    return NormProblem(A=[[0.9]], B=[[1]], N=[N], s=[1], r=[-10], norm=norm)


# Acceptance criteria report one PASS/FAIL line each in the terminal summary.
ACCEPTANCE = {}


def record_acceptance(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])

import math

import numpy as np
import pytest

from hcclsgo import aob

BASES = sorted(aob.BASE_FUNCTIONS)


def scalar_osz(x):
    if x == 0:
        return 0.0
    xh = math.log(abs(x))
    c1, c2 = (10.0, 7.9) if x > 0 else (5.5, 3.1)
    return math.copysign(math.exp(xh + 0.049 * (math.sin(c1 * xh) + math.sin(c2 * xh))), x)


def scalar_asy(v, beta):
    n = len(v)
    return [x ** (1 + beta * (i / (n - 1)) * math.sqrt(x)) if x > 0 and n > 1 else x for i, x in enumerate(v)]


def scalar_base(name, z):
    n = len(z)
    if name == "schwefel":
        return sum(sum(z[: i + 1]) ** 2 for i in range(n))
    if name == "elliptic":
        return sum(10 ** (6 * i / (n - 1)) * z[i] ** 2 for i in range(n))
    if name == "rastrigin":
        return sum(x * x - 10 * math.cos(2 * math.pi * x) + 10 for x in z)
    # the textbook expression, evaluated in higher precision
    import mpmath
    with mpmath.workdps(40):
        r = (-20 * mpmath.exp(-mpmath.mpf("0.2") * mpmath.sqrt(mpmath.fsum(mpmath.mpf(x) ** 2 for x in z) / n))
             - mpmath.exp(mpmath.fsum(mpmath.cos(2 * mpmath.pi * mpmath.mpf(x)) for x in z) / n) + 20 + mpmath.e)
        return float(r)


def scalar_objective(inst, x):
    """Loop-by-loop evaluation straight from the composition formula."""
    y = [xi - si for xi, si in zip(x, inst.shift)]
    total = 0.0
    for w, sub, R in zip(inst.weights, inst.subspaces, inst.rotations):
        yi = [y[j] for j in sub]
        k = len(yi)
        ry = [sum(R[a][b] * yi[b] for b in range(k)) for a in range(k)]
        z = scalar_asy([scalar_osz(v) for v in ry], 0.2)
        total += w * scalar_base(inst.spec.base, z)
    return total


@pytest.fixture(scope="session")
def mini_instances():
    return {(b, lvl): aob.generate_instance(aob.ProblemSpec.preset(b, lvl, seed=3, scale="mini"))
            for b in BASES for lvl in range(1, 7)}


@pytest.fixture(scope="session")
def full_instances():
    return {(b, lvl): aob.generate_instance(aob.ProblemSpec.preset(b, lvl, seed=2024))
            for b in BASES for lvl in range(1, 7)}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        title, ok, secs = RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}  ({secs:.1f}s)")

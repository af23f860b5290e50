import numpy as np
import pytest
from scipy import optimize, special

from kvrand import kernels


def erfinv_oracle(p):
    """Inverse of erf by Newton iteration on erf itself (independent of scipy's erfinv)."""
    p = np.asarray(p, dtype=np.float64)
    x = np.zeros_like(p)
    for _ in range(100):
        step = (special.erf(x) - p) / (2.0 / np.sqrt(np.pi) * np.exp(-x * x))
        x = x - step
        if np.all(np.abs(step) < 1e-15 * np.maximum(1.0, np.abs(x))):
            break
    return x


def normal_quantile(y, sigma=0.2, mu=0.0):
    return mu + sigma * np.sqrt(2.0) * erfinv_oracle(2.0 * np.asarray(y) - 1.0)


def scan_roots(f, a, b, y, n=200_001):
    """Dense sign-change scan + brentq; returns sorted roots of f(x) = y."""
    x = np.linspace(a, b, n)
    d = f(x) - y
    roots = list(x[d == 0])
    for i in np.flatnonzero(d[:-1] * d[1:] < 0):
        roots.append(optimize.brentq(lambda t: f(t) - y, x[i], x[i + 1], xtol=1e-15))
    return np.sort(np.array(roots))


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return request.param


ACCEPTANCE_LINES = []


def report_criterion(number, ok, detail):
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)

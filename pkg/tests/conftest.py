"""Shared reference systems and a cached default pipeline run."""
from __future__ import annotations

import numpy as np
import pytest
from scipy.integrate import solve_ivp


def henon_x(n: int, a: float = 1.4, b: float = 0.3, burn: int = 1000) -> np.ndarray:
    x, y = 0.1, 0.1
    out = np.empty(n)
    for i in range(n + burn):
        x, y = 1 - a * x * x + y, b * x
        if i >= burn:
            out[i - burn] = x
    return out


def lorenz_x(n: int, dt: float = 0.01, burn: int = 2000) -> np.ndarray:
    def rhs(_t, s):
        return [10 * (s[1] - s[0]), s[0] * (28 - s[2]) - s[1], s[0] * s[1] - 8 / 3 * s[2]]
    t = np.arange(n + burn) * dt
    sol = solve_ivp(rhs, (0, t[-1]), [1.0, 1.0, 1.0], t_eval=t, rtol=1e-10, atol=1e-10)
    return sol.y[0, burn:]


def logistic(n: int, r: float = 4.0, x0: float = 0.1234, burn: int = 100) -> np.ndarray:
    x = x0
    out = np.empty(n)
    for i in range(n + burn):
        x = r * x * (1 - x)
        if i >= burn:
            out[i - burn] = x
    return out


@pytest.fixture(scope="session")
def default_run(tmp_path_factory):
    """One full run of the shipped manifest, shared across test modules."""
    import time

    from concrete_rc.pipeline import load_manifest, run_pipeline

    out = tmp_path_factory.mktemp("run_a")
    t0 = time.perf_counter()
    result = run_pipeline(load_manifest(), out)
    result["elapsed_s"] = time.perf_counter() - t0
    return result


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

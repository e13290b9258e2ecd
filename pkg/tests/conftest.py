import numpy as np
import pytest

ACCEPTANCE = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (passed, detail)
    print(f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture
def record_criterion():
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if passed else 'FAIL'}  {detail}")


def central_diff(f, theta, rel_step=1e-6):
    """Central differences of a scalar or vector function, one coordinate at a time."""
    theta = np.array(theta, dtype=np.float64)
    f0 = np.asarray(f(theta), dtype=np.float64)
    out = np.empty(f0.shape + theta.shape)
    for idx in np.ndindex(theta.shape):
        h = rel_step * max(1.0, abs(theta[idx]))
        up = theta.copy()
        dn = theta.copy()
        up[idx] += h
        dn[idx] -= h
        out[(...,) + idx] = (np.asarray(f(up)) - np.asarray(f(dn))) / (up[idx] - dn[idx])
    return out


def richardson_diff(f, theta, rel_step=1e-3):
    """Fourth-order differences: Richardson extrapolation of two central steps."""
    coarse = central_diff(f, theta, 2 * rel_step)
    fine = central_diff(f, theta, rel_step)
    return (4 * fine - coarse) / 3


def max_rel_err(analytic, numeric) -> float:
    """Largest entry-wise error relative to max(|a|, |n|, 1e-4 * max|n|)."""
    a = np.asarray(analytic, dtype=np.float64)
    n = np.asarray(numeric, dtype=np.float64)
    floor = max(1e-4 * float(np.max(np.abs(n), initial=0.0)), 1e-12)
    return float(np.max(np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)))

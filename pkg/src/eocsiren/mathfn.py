"""Principal branch of the Lambert W function on the real line."""
import math

import numpy as np

BRANCH_POINT = -math.exp(-1.0)
DOMAIN_TOL = 1e-15


class DomainError(ValueError):
    """Argument outside the real domain of a special function."""


def _halley(x, w, tol=1e-14, max_iter=50):
    for _ in range(max_iter):
        ew = math.exp(w)
        f = w * ew - x
        if abs(f) <= tol * max(1.0, abs(x)):
            break
        wp1 = w + 1.0
        denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1)
        step = f / denom
        w -= step
        if abs(step) <= 1e-16 * max(1.0, abs(w)):
            break
    return w


def lambert_w0(x):
    """Solve ``w * exp(w) = x`` for w >= -1.

    Accepts scalars or array-likes; arrays are evaluated element-wise.
    Raises :class:`DomainError` for ``x < -1/e - 1e-15``.
    """
    if np.ndim(x):
        arr = np.asarray(x, dtype=np.float64)
        return np.vectorize(lambert_w0, otypes=[np.float64])(arr)
    x = float(x)
    if math.isnan(x):
        raise DomainError("lambert_w0 of NaN")
    if x < BRANCH_POINT - DOMAIN_TOL:
        raise DomainError(f"lambert_w0 undefined for x={x!r} < -1/e")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return math.inf
    if x <= BRANCH_POINT + 1e-6:
        # square-root singularity: Halley stalls, use the branch-point series
        p = math.sqrt(max(2.0 * (math.e * x + 1.0), 0.0))
        return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    if abs(x) < 0.5:
        w = x
    else:
        w = math.log1p(x)
    if x < -0.25:
        # closer start on the steep part of the branch
        p = math.sqrt(2.0 * (math.e * x + 1.0))
        w = -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p**3
    return max(_halley(x, w), -1.0)

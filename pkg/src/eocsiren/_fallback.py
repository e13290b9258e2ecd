"""Pure numpy implementations of the compiled kernels.

Same signatures and return conventions as ``_kernels``.  The Jacobi solvers
here use the round-robin (parallel) ordering so that each round of n/2
disjoint rotations is a handful of vectorized numpy operations, instead of
n/2 Python-level loops.
"""
import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def splitmix_block(key, counter, n):
    idx = np.arange(1, n + 1, dtype=np.uint64) + np.uint64(counter)
    with np.errstate(over="ignore"):
        z = np.uint64(key) + idx * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _round_robin(n):
    """Yield index arrays (p, q) covering every pair once per sweep."""
    m = n + (n % 2)
    players = list(range(m))
    for _ in range(m - 1):
        p = []
        q = []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                p.append(min(a, b))
                q.append(max(a, b))
        yield np.array(p, dtype=np.intp), np.array(q, dtype=np.intp)
        players = [players[0]] + [players[-1]] + players[1:-1]


def _rotation(theta):
    t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
    c = 1.0 / np.sqrt(t * t + 1.0)
    return c, t * c


def jacobi_eigh(a, tol, max_sweeps):
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    fro = np.linalg.norm(a)
    schedule = list(_round_robin(n))
    for sweep in range(max_sweeps + 1):
        off = np.sqrt(2.0 * np.sum(np.triu(a, 1) ** 2))
        if off <= tol * fro:
            return np.diag(a).copy(), v, sweep
        if sweep == max_sweeps:
            break
        for p, q in schedule:
            apq = a[p, q]
            app = a[p, p]
            aqq = a[q, q]
            active = np.abs(apq) > 1e-18 * np.sqrt(np.abs(app * aqq))
            if not active.any():
                a[p, q] = 0.0
                a[q, p] = 0.0
                continue
            safe = np.where(active, apq, 1.0)
            theta = (aqq - app) / (2.0 * safe)
            c, s = _rotation(theta)
            c = np.where(active, c, 1.0)
            s = np.where(active, s, 0.0)
            x = a[:, p].copy()
            y = a[:, q]
            a[:, p] = c * x - s * y
            a[:, q] = s * x + c * y
            x = a[p, :].copy()
            y = a[q, :]
            a[p, :] = c[:, None] * x - s[:, None] * y
            a[q, :] = s[:, None] * x + c[:, None] * y
            a[p, q] = 0.0
            a[q, p] = 0.0
            x = v[:, p].copy()
            y = v[:, q]
            v[:, p] = c * x - s * y
            v[:, q] = s * x + c * y
    return np.diag(a).copy(), v, -1


def jacobi_svd_rows(g, tol, max_sweeps):
    g = np.array(g, dtype=np.float64)
    r = g.shape[0]
    schedule = list(_round_robin(r))
    for sweep in range(max_sweeps):
        rotated = False
        for p, q in schedule:
            gp = g[p]
            gq = g[q]
            alpha = np.einsum("ij,ij->i", gp, gp)
            beta = np.einsum("ij,ij->i", gq, gq)
            gamma = np.einsum("ij,ij->i", gp, gq)
            active = (gamma != 0.0) & (np.abs(gamma) > tol * np.sqrt(alpha * beta))
            if not active.any():
                continue
            rotated = True
            zeta = (beta - alpha) / (2.0 * np.where(active, gamma, 1.0))
            c, s = _rotation(zeta)
            c = np.where(active, c, 1.0)[:, None]
            s = np.where(active, s, 0.0)[:, None]
            g[p] = c * gp - s * gq
            g[q] = s * gp + c * gq
        if not rotated:
            return np.sqrt(np.einsum("ij,ij->i", g, g)), sweep + 1
    return np.sqrt(np.einsum("ij,ij->i", g, g)), -1


def dft(re, im):
    x = np.asarray(re, dtype=np.float64) + 1j * np.asarray(im, dtype=np.float64)
    n = x.shape[0]
    j = np.arange(n)
    tw = np.cos(2.0 * np.pi * j / n) - 1j * np.sin(2.0 * np.pi * j / n)
    if n > 0 and n & (n - 1) == 0:
        bits = n.bit_length() - 1
        rev = np.zeros(n, dtype=np.intp)
        for b in range(bits):
            rev |= ((j >> b) & 1) << (bits - 1 - b)
        out = np.empty(n, dtype=np.complex128)
        out[rev] = x
        size = 2
        while size <= n:
            half = size // 2
            w = tw[np.arange(half) * (n // size)]
            blocks = out.reshape(-1, size)
            u = blocks[:, :half].copy()
            t = w * blocks[:, half:]
            blocks[:, :half] = u + t
            blocks[:, half:] = u - t
            size *= 2
        return out
    out = np.empty(n, dtype=np.complex128)
    chunk = max(1, 2**20 // max(n, 1))
    for start in range(0, n, chunk):
        k = np.arange(start, min(start + chunk, n))
        out[k] = (tw[np.outer(k, j) % n] * x).sum(axis=1)
    return out

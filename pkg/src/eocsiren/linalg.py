"""Dense linear algebra, DFT and a reproducible random stream.

Matrices are plain 2-D ``float64`` numpy arrays.  The eigen/singular value
solvers and the DFT run on the compiled kernels when available (see
``_backend``); products go through numpy's BLAS.
"""
from __future__ import annotations

import math

import numpy as np

from . import _backend


class ConvergenceError(ArithmeticError):
    """Iterative solver exhausted its sweep budget."""


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=np.float64)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {a.shape}")
    return a


def matmul(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return a @ b


def eigh_symmetric(m, tol=1e-14, max_sweeps=60, backend=None):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    The input is symmetrized as ``(M + M.T) / 2`` first.  Returns
    ``(eigenvalues, eigenvectors)`` with eigenvalues in descending order and
    eigenvectors as orthonormal columns.  Each eigenvector's sign is fixed so
    that its largest-magnitude entry is positive.
    """
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"eigh_symmetric needs a square matrix, got {a.shape}")
    n = a.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0))
    a = np.ascontiguousarray(0.5 * (a + a.T))
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    kern = backend or _backend.active
    w, v, sweeps = kern.jacobi_eigh(a, tol, max_sweeps)
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
    order = np.argsort(-w, kind="stable")
    w = np.asarray(w)[order]
    v = np.asarray(v)[:, order]
    pivot = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[pivot, np.arange(n)])
    signs[signs == 0] = 1.0
    return w, v * signs


def singular_values(m, tol=1e-15, max_sweeps=80, backend=None) -> np.ndarray:
    """Singular values (descending) by one-sided Jacobi orthogonalization."""
    a = as_matrix(m)
    if a.size == 0:
        return np.zeros(0)
    g = a if a.shape[0] <= a.shape[1] else a.T
    g = np.ascontiguousarray(g, dtype=np.float64)
    kern = backend or _backend.active
    s, sweeps = kern.jacobi_svd_rows(g.copy(), tol, max_sweeps)
    if sweeps < 0:
        raise ConvergenceError(f"one-sided Jacobi did not converge in {max_sweeps} sweeps")
    return np.sort(np.asarray(s))[::-1]


def dft_1d(signal, backend=None) -> np.ndarray:
    """Full N-bin complex spectrum ``X_k = sum_n x_n exp(-2j*pi*k*n/N)``."""
    x = np.asarray(signal)
    if x.ndim != 1:
        raise ValueError("dft_1d expects a 1-D signal")
    if x.shape[0] < 2:
        raise ValueError("dft_1d needs at least two samples")
    kern = backend or _backend.active
    re = np.ascontiguousarray(np.real(x), dtype=np.float64)
    im = np.ascontiguousarray(np.imag(x), dtype=np.float64)
    return np.asarray(kern.dft(re, im))


def half_spectrum(spectrum) -> np.ndarray:
    """Magnitudes of bins 0..N/2 of a full spectrum."""
    spectrum = np.asarray(spectrum)
    return np.abs(spectrum[: spectrum.shape[0] // 2 + 1])


_MASK64 = (1 << 64) - 1


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class Rng:
    """Counter-based splitmix64 stream.

    Draw ``i`` of a stream is ``mix64(key + (i + 1) * golden_gamma)`` so any
    block of draws can be produced in one vectorized call, and the compiled
    and numpy kernels give the same bits.  ``split`` derives independent
    child streams (one per ensemble member, sweep cell, ...).
    """

    def __init__(self, seed: int = 0, *, _key: int | None = None):
        self.seed = int(seed)
        self.key = _mix64(self.seed & _MASK64) if _key is None else _key
        self.counter = 0

    def split(self, index: int) -> "Rng":
        child_key = _mix64((self.key ^ _mix64((int(index) + 0x632BE59BD9B4E019) & _MASK64)) & _MASK64)
        return Rng(self.seed, _key=child_key)

    def bits(self, n: int) -> np.ndarray:
        out = _backend.active.splitmix_block(self.key, self.counter, int(n))
        self.counter += int(n)
        return np.asarray(out, dtype=np.uint64)

    def random(self, size=None):
        """Uniform doubles in [0, 1) with 53 random bits."""
        n = 1 if size is None else int(np.prod(size))
        u = (self.bits(n) >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
        return float(u[0]) if size is None else u.reshape(size)

    def uniform(self, lo=0.0, hi=1.0, size=None):
        if not lo < hi:
            raise ValueError(f"uniform needs lo < hi, got [{lo}, {hi})")
        u = self.random(size)
        out = lo + (hi - lo) * np.asarray(u)
        out = np.minimum(out, np.nextafter(hi, lo))
        return float(out) if size is None else out

    def normal(self, mean=0.0, std=1.0, size=None):
        """Gaussian draws by Box-Muller; ``std=0`` returns ``mean`` exactly."""
        if std < 0:
            raise ValueError(f"normal needs std >= 0, got {std}")
        n = 1 if size is None else int(np.prod(size))
        pairs = (n + 1) // 2
        u = self.random((2, pairs))
        radius = np.sqrt(-2.0 * np.log1p(-u[0]))
        angle = 2.0 * math.pi * u[1]
        z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:n]
        out = mean + std * z
        return float(out[0]) if size is None else out.reshape(size)


def rng_uniform(rng: Rng, lo: float, hi: float) -> float:
    return rng.uniform(lo, hi)


def rng_normal(rng: Rng, mean: float, std: float) -> float:
    return rng.normal(mean, std)

# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops: counter-based PRNG, cyclic Jacobi solvers, DFT.

Every routine here has a numpy twin in ``_fallback``; the two must agree
(bit-for-bit for the generator, to round-off for the solvers).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, cos, sin, M_PI
from libc.stdint cimport uint64_t

cnp.import_array()

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t MIX2 = 0x94D049BB133111EBULL


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * MIX1
    z = (z ^ (z >> 27)) * MIX2
    return z ^ (z >> 31)


def splitmix_block(uint64_t key, uint64_t counter, Py_ssize_t n):
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _mix64(key + (counter + <uint64_t>i + 1) * GAMMA)
    return out


def jacobi_eigh(double[:, ::1] a, double tol, int max_sweeps):
    """Cyclic two-sided Jacobi on a symmetric matrix, in place.

    Returns ``(eigenvalues, eigenvectors, sweeps)``; ``sweeps == -1`` when
    the off-diagonal norm did not fall below ``tol * ||A||_F``.
    """
    cdef Py_ssize_t n = a.shape[0]
    v_arr = np.eye(n)
    cdef double[:, ::1] v = v_arr
    cdef Py_ssize_t p, q, k
    cdef int sweep, result = -1
    cdef double off, fro = 0.0, apq, app, aqq, theta, t, c, s, x, y
    with nogil:
        for p in range(n):
            for q in range(n):
                fro += a[p, q] * a[p, q]
        fro = sqrt(fro)
        for sweep in range(max_sweeps + 1):
            off = 0.0
            for p in range(n):
                for q in range(p + 1, n):
                    off += a[p, q] * a[p, q]
            if sqrt(off) <= tol * fro:
                result = sweep
                break
            if sweep == max_sweeps:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = a[p, q]
                    if apq == 0.0:
                        continue
                    app = a[p, p]
                    aqq = a[q, q]
                    if fabs(apq) <= 1e-18 * sqrt(fabs(app * aqq)):
                        a[p, q] = 0.0
                        a[q, p] = 0.0
                        continue
                    theta = (aqq - app) / (2.0 * apq)
                    if fabs(theta) > 1e150:
                        t = 0.5 / theta
                    elif theta >= 0.0:
                        t = 1.0 / (theta + sqrt(theta * theta + 1.0))
                    else:
                        t = -1.0 / (-theta + sqrt(theta * theta + 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    s = t * c
                    for k in range(n):
                        x = a[k, p]
                        y = a[k, q]
                        a[k, p] = c * x - s * y
                        a[k, q] = s * x + c * y
                    for k in range(n):
                        x = a[p, k]
                        y = a[q, k]
                        a[p, k] = c * x - s * y
                        a[q, k] = s * x + c * y
                    a[p, q] = 0.0
                    a[q, p] = 0.0
                    for k in range(n):
                        x = v[k, p]
                        y = v[k, q]
                        v[k, p] = c * x - s * y
                        v[k, q] = s * x + c * y
    w = np.array([a[k, k] for k in range(n)], dtype=np.float64)
    return w, v_arr, result


def jacobi_svd_rows(double[:, ::1] g, double tol, int max_sweeps):
    """One-sided (Hestenes) Jacobi: orthogonalize the rows of ``g`` in place.

    The row norms afterwards are the singular values.  Returns
    ``(norms, sweeps)`` with ``sweeps == -1`` on non-convergence.
    """
    cdef Py_ssize_t r = g.shape[0], m = g.shape[1]
    cdef Py_ssize_t p, q, k
    cdef int sweep, rotated, result = -1
    cdef double alpha, beta, gamma, zeta, t, c, s, x, y
    sq_arr = np.empty(r)
    cdef double[::1] sq = sq_arr
    with nogil:
        for sweep in range(max_sweeps):
            # refresh cached squared norms once per sweep to bound drift
            for p in range(r):
                alpha = 0.0
                for k in range(m):
                    alpha += g[p, k] * g[p, k]
                sq[p] = alpha
            rotated = 0
            for p in range(r - 1):
                for q in range(p + 1, r):
                    alpha = sq[p]
                    beta = sq[q]
                    gamma = 0.0
                    for k in range(m):
                        gamma += g[p, k] * g[q, k]
                    if gamma == 0.0 or fabs(gamma) <= tol * sqrt(alpha * beta):
                        continue
                    rotated = 1
                    zeta = (beta - alpha) / (2.0 * gamma)
                    if fabs(zeta) > 1e150:
                        t = 0.5 / zeta
                    elif zeta >= 0.0:
                        t = 1.0 / (zeta + sqrt(1.0 + zeta * zeta))
                    else:
                        t = -1.0 / (-zeta + sqrt(1.0 + zeta * zeta))
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = c * t
                    for k in range(m):
                        x = g[p, k]
                        y = g[q, k]
                        g[p, k] = c * x - s * y
                        g[q, k] = s * x + c * y
                    sq[p] = alpha - t * gamma
                    sq[q] = beta + t * gamma
            if not rotated:
                result = sweep + 1
                break
    norms = np.sqrt(np.einsum("ij,ij->i", np.asarray(g), np.asarray(g)))
    return norms, result


def dft(const double[::1] re, const double[::1] im):
    """Full complex DFT, X_k = sum_n x_n exp(-2 pi i k n / N)."""
    cdef Py_ssize_t n = re.shape[0]
    cdef Py_ssize_t j, k, idx, size, half, start, step, bits, rev, tmp
    cdef double wr, wi, tr, ti, ur, ui, sr, si
    tw_r = np.empty(n)
    tw_i = np.empty(n)
    cdef double[::1] cr = tw_r
    cdef double[::1] ci = tw_i
    out_r = np.zeros(n)
    out_i = np.zeros(n)
    cdef double[::1] xr = out_r
    cdef double[::1] xi = out_i
    with nogil:
        for j in range(n):
            cr[j] = cos(2.0 * M_PI * j / n)
            ci[j] = -sin(2.0 * M_PI * j / n)
    if n > 0 and (n & (n - 1)) == 0:
        with nogil:
            bits = 0
            while (1 << bits) < n:
                bits += 1
            for j in range(n):
                rev = 0
                tmp = j
                for k in range(bits):
                    rev = (rev << 1) | (tmp & 1)
                    tmp >>= 1
                xr[rev] = re[j]
                xi[rev] = im[j]
            size = 2
            while size <= n:
                half = size // 2
                step = n // size
                start = 0
                while start < n:
                    for k in range(half):
                        wr = cr[k * step]
                        wi = ci[k * step]
                        ur = xr[start + k]
                        ui = xi[start + k]
                        sr = xr[start + k + half]
                        si = xi[start + k + half]
                        tr = wr * sr - wi * si
                        ti = wr * si + wi * sr
                        xr[start + k] = ur + tr
                        xi[start + k] = ui + ti
                        xr[start + k + half] = ur - tr
                        xi[start + k + half] = ui - ti
                    start += size
                size *= 2
    else:
        with nogil:
            for k in range(n):
                sr = 0.0
                si = 0.0
                for j in range(n):
                    idx = (k * j) % n
                    sr += re[j] * cr[idx] - im[j] * ci[idx]
                    si += re[j] * ci[idx] + im[j] * cr[idx]
                xr[k] = sr
                xi[k] = si
    return out_r + 1j * out_i

"""Empirical checks of the initialization theory.

Everything here works on freshly sampled networks: per-layer variance
profiles, input-gradient scaling with depth, the empirical NTK and its
spectrum, linearized training dynamics, output Fourier spectra, Fourier
overlap of NTK eigenvectors and singular values of the end-to-end Jacobian.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .initialization import InitScheme, resolve_scheme, sample_network
from .linalg import Rng, dft_1d, eigh_symmetric, singular_values
from .network import (
    SirenNet,
    backward_deltas,
    end_to_end_jacobians_batched,
    forward,
    input_gradients,
)

MAX_NTK_POINTS = 512


def _scheme(s) -> InitScheme:
    return InitScheme.parse(s) if isinstance(s, str) else s


def _grid(inputs) -> np.ndarray:
    x = np.asarray(inputs, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.size == 0:
        raise ValueError("input grid is empty")
    return x


# ---------------------------------------------------------------- variance

@dataclass
class VarianceProfile:
    """Per-layer pooled statistics for layers 1..L-1 (index 0 is layer 1).

    ``jac_scaled_std[l]`` is ``sqrt(fan_in * Var)`` of the entries of
    ``J_l = diag(cos z_l) W_l``; it is NaN for layer 1, whose fan-in is the
    input dimension.
    """

    scheme: str
    width: int
    depth: int
    n_ensembles: int
    n_inputs: int
    seed: int
    preact_std: np.ndarray
    preact_se: np.ndarray
    jac_scaled_std: np.ndarray
    jac_se: np.ndarray

    @property
    def effective_samples(self) -> int:
        return self.n_ensembles * self.n_inputs

    def rows(self) -> list[dict]:
        return [
            {"scheme": self.scheme, "L": self.depth, "N": self.width, "layer": i + 1,
             "preact_std": float(self.preact_std[i]), "preact_se": float(self.preact_se[i]),
             "jac_scaled_std": float(self.jac_scaled_std[i]), "jac_se": float(self.jac_se[i]),
             "ensembles": self.n_ensembles, "inputs": self.n_inputs, "seed": self.seed}
            for i in range(len(self.preact_std))
        ]


def variance_profile(scheme, width: int, depth: int, n_ensembles: int, inputs,
                     seed: int = 0, omega0: float = 1.0) -> VarianceProfile:
    """Pool pre-activations and layer-Jacobian entries over ensembles, inputs, neurons."""
    if n_ensembles < 1:
        raise ValueError("n_ensembles must be >= 1")
    x = _grid(inputs)
    scheme = _scheme(scheme)
    params = resolve_scheme(scheme, omega0, x.shape[1], width, depth)
    root = Rng(seed)
    n_hidden = depth - 1
    # running sums: count, sum, sum of squares
    z_acc = np.zeros((n_hidden, 3))
    j_acc = np.zeros((n_hidden, 3))
    for e in range(n_ensembles):
        net = sample_network(params, root.split(e), seed)
        trace = forward(net, x)
        for ell in range(n_hidden):
            z = trace.pre[ell]
            z_acc[ell] += (z.size, z.sum(), np.sum(z * z))
            w = net.weights[ell]
            c = np.cos(z)
            # sum_ij cos(z_i) W_ij and sum_ij cos(z_i)^2 W_ij^2 without forming J
            j_acc[ell] += (z.size * w.shape[1], np.sum(c @ w.sum(axis=1)),
                           np.sum((c * c) @ np.sum(w * w, axis=1)))
    eff = math.sqrt(n_ensembles * x.shape[0])

    def std(acc):
        mean = acc[:, 1] / acc[:, 0]
        return np.sqrt(np.maximum(acc[:, 2] / acc[:, 0] - mean**2, 0.0))

    z_std = std(z_acc)
    fan_in = np.array([spec.fan_in for spec in params.layers[:n_hidden]], dtype=float)
    j_std = np.sqrt(fan_in) * std(j_acc)
    j_std[0] = np.nan
    return VarianceProfile(scheme.label, width, depth, n_ensembles, x.shape[0], seed,
                           z_std, z_std / eff, j_std, j_std / eff)


def monotone_decay(values, errors, n_sigma: float = 3.0) -> bool:
    """True if ``values`` never rises by more than ``n_sigma`` errors and ends lower."""
    v = np.asarray(values, dtype=float)
    e = np.asarray(errors, dtype=float)
    if v.size < 2:
        return False
    rises = np.diff(v) > n_sigma * np.maximum(e[1:], e[:-1])
    return (not rises.any()) and v[-1] < v[0] - n_sigma * max(e[0], e[-1])


def mean_field_profile(scheme, width: int, depth: int, inputs, omega0: float = 1.0) -> np.ndarray:
    """Infinite-width prediction of the pooled pre-activation std, layers 1..L-1.

    The variance recursion is run separately for every input (the first
    layer's variance depends on ``x``) and the per-input variances are then
    averaged, which is what pooling over inputs measures.  At finite depth
    this sits below the fixed point whenever some inputs start far from it.
    """
    x = _grid(inputs)
    params = resolve_scheme(_scheme(scheme), omega0, x.shape[1], width, depth)
    l1, l2 = params.layers[0], params.layers[1]
    var = l1.weight.variance * np.sum(x * x, axis=1) + l1.bias.variance
    # hidden-layer weight variance times fan-in plays the role of c_w^2 / 3
    a = l2.weight.variance * width
    out = [np.sqrt(var.mean())]
    for _ in range(2, depth):
        var = a / 2.0 * (1.0 - np.exp(-2.0 * var)) + l2.bias.variance
        out.append(np.sqrt(var.mean()))
    return np.array(out)


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    target: float
    tolerance: float

    def row(self) -> dict:
        return asdict(self)


def profile_checks(profile: VarianceProfile, omega0: float = 1.0, n0: int = 1) -> list[Check]:
    """Deep-layer tests of a variance profile against the closed forms.

    Pre-activation std must sit within three standard errors of ``sigma_a``
    (a monotone-decay trend test when ``sigma_a = 0``, where convergence is
    only O(1/l)); the scaled Jacobian std must be within 0.05 of ``sigma_g``.
    """
    params = resolve_scheme(InitScheme.parse(profile.scheme), omega0, n0, profile.width, profile.depth)
    s_a = params.sigma_a()
    s_g = params.sigma_g()
    z, z_se = profile.preact_std[-1], profile.preact_se[-1]
    if s_a == 0.0:
        ok = monotone_decay(profile.preact_std[1:], profile.preact_se[1:])
        pre = Check("preact_decay", ok, float(z), 0.0, float("nan"))
    else:
        pre = Check("preact_std", bool(abs(z - s_a) <= 3 * z_se), float(z), s_a, 3 * float(z_se))
    j = profile.jac_scaled_std[-1]
    jac = Check("jac_scaled_std", bool(abs(j - s_g) <= 0.05), float(j), s_g, 0.05)
    return [pre, jac]


# ---------------------------------------------------------- gradient scan

@dataclass
class GradientScan:
    scheme: str
    width: int
    depths: list
    input_grad_std: np.ndarray
    param_grad_var: list  # per depth: array over layers 1..L
    slope: float
    seed: int

    def rows(self) -> list[dict]:
        out = []
        for L, s, pv in zip(self.depths, self.input_grad_std, self.param_grad_var):
            for ell, v in enumerate(pv, start=1):
                out.append({"scheme": self.scheme, "L": L, "N": self.width, "layer": ell,
                            "input_grad_std": float(s), "param_grad_var": float(v),
                            "slope": self.slope, "seed": self.seed})
        return out


def log_slope(depths, values) -> float:
    """Least-squares slope of ``log(values)`` against depth."""
    return float(np.polyfit(np.asarray(depths, float), np.log(np.asarray(values, float)), 1)[0])


def gradient_depth_scan(scheme, width: int, depths, omega0: float = 1.0, inputs=None,
                        ensembles: int = 20, seed: int = 0) -> GradientScan:
    """Input-gradient RMS and per-layer weight-gradient variance for each depth.

    The input-gradient "std" is the root mean square of ``dPsi/dx`` pooled
    over inputs and ensembles (its mean is zero by symmetry of the weights).
    """
    depths = list(depths)
    if depths != sorted(depths):
        raise ValueError("depths must be ascending")
    x = _grid(np.linspace(-1.0, 1.0, 200) if inputs is None else inputs)
    scheme = _scheme(scheme)
    root = Rng(seed)
    stds, pvars = [], []
    for L in depths:
        params = resolve_scheme(scheme, omega0, x.shape[1], width, L)
        sq = 0.0
        layer_sq = np.zeros(L)
        layer_n = np.zeros(L)
        stream = root.split(L)
        for e in range(ensembles):
            net = sample_network(params, stream.split(e), seed)
            trace = forward(net, x)
            g = input_gradients(net, x)
            sq += np.sum(g * g)
            deltas = backward_deltas(net, trace, np.ones((x.shape[0], 1)))
            for ell, d in enumerate(deltas):
                h = trace.hidden(ell + 1)
                # squared per-sample weight gradients, summed without the outer product
                layer_sq[ell] += np.sum((d * d).T @ (h * h))
                layer_n[ell] += d.shape[0] * d.shape[1] * h.shape[1]
        stds.append(math.sqrt(sq / (ensembles * g.size)))
        pvars.append(layer_sq / layer_n)
    stds = np.array(stds)
    return GradientScan(scheme.label, width, depths, stds, pvars, log_slope(depths, stds), seed)


# --------------------------------------------------------------------- NTK

@dataclass
class NtkResult:
    matrix: np.ndarray
    eigenvalues: np.ndarray | None
    eigenvectors: np.ndarray | None
    normalized_trace: float
    width: int

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix))

    def rows(self) -> list[dict]:
        if self.eigenvalues is None:
            return [{"trace": self.trace, "normalized_trace": self.normalized_trace}]
        return [{"index": i, "eigenvalue": float(v), "normalized_trace": self.normalized_trace}
                for i, v in enumerate(self.eigenvalues)]


def _ntk_blocks(net: SirenNet, x: np.ndarray):
    trace = forward(net, x)
    deltas = backward_deltas(net, trace, np.ones((x.shape[0], 1)))
    return [(d, trace.hidden(ell + 1)) for ell, d in enumerate(deltas)]


def ntk_gram(net: SirenNet, inputs) -> np.ndarray:
    """Empirical NTK without forming tangent features.

    ``d Psi / d W_l = delta_l h_{l-1}^T`` factorizes, so the Gram matrix is
    ``sum_l (Delta_l Delta_l^T) * (H_{l-1} H_{l-1}^T + 1)``.
    """
    if net.d_out != 1:
        raise ValueError("NTK needs a scalar-output net")
    x = _grid(inputs)
    if x.shape[0] > MAX_NTK_POINTS:
        raise MemoryError(f"{x.shape[0]} inputs exceeds the NTK guard of {MAX_NTK_POINTS}")
    k = np.zeros((x.shape[0], x.shape[0]))
    for d, h in _ntk_blocks(net, x):
        k += (d @ d.T) * (h @ h.T + 1.0)
    return 0.5 * (k + k.T)


def ntk_trace(net: SirenNet, inputs) -> float:
    """``Tr K = sum_i ||grad_theta Psi(x_i)||^2`` in O(|I| P) time."""
    x = _grid(inputs)
    return float(sum(np.sum(np.sum(d * d, axis=1) * (np.sum(h * h, axis=1) + 1.0))
                     for d, h in _ntk_blocks(net, x)))


def ntk_matrix(net: SirenNet, inputs, eigen: bool = True) -> NtkResult:
    x = _grid(inputs)
    k = ntk_gram(net, x)
    n = net.weights[0].shape[0]
    w = v = None
    if eigen:
        w, v = eigh_symmetric(k)
    return NtkResult(k, w, v, float(np.trace(k)) / (x.shape[0] * n), n)


@dataclass
class NtkTraceScan:
    scheme: str
    width: int
    depths: list
    normalized_trace: np.ndarray
    classification: str
    fit: dict
    seed: int

    def rows(self) -> list[dict]:
        return [{"scheme": self.scheme, "L": L, "N": self.width, "normalized_trace": float(t),
                 "classification": self.classification, "seed": self.seed}
                for L, t in zip(self.depths, self.normalized_trace)]


def _r2(x, y, coef) -> float:
    resid = y - np.polyval(coef, x)
    ss = np.sum((y - y.mean()) ** 2)
    return 1.0 - float(np.sum(resid**2) / ss) if ss > 0 else 1.0


def classify_growth(depths, traces, min_depth: int = 3) -> tuple[str, dict]:
    """Label a trace-vs-depth curve as exponential, linear or plateau.

    Depths below ``min_depth`` are left out of the fits: with fewer than
    two hidden layers there is no hidden-to-hidden Jacobian, so they are
    outside the asymptotic regime.  Exponential needs log-slope > 0.05 with
    R^2 > 0.95 and a better log fit than the linear one; linear needs
    R^2 > 0.95 and positive slope; plateau needs the last-third mean within
    5% of the middle-third mean.
    """
    d = np.asarray(depths, float)
    t = np.asarray(traces, float)
    keep = d >= min_depth
    d, t = d[keep], t[keep]
    if d.size < 3:
        return "undetermined", {}
    exp_coef = np.polyfit(d, np.log(t), 1)
    lin_coef = np.polyfit(d, t, 1)
    r2_exp = _r2(d, np.log(t), exp_coef)
    r2_lin = _r2(d, t, lin_coef)
    third = max(1, d.size // 3)
    mid = t[third:2 * third].mean()
    last = t[-third:].mean()
    half = d.size // 2
    ratio = float(np.exp(np.polyfit(d[half:], np.log(t[half:]), 1)[0])) if d.size - half >= 2 else float("nan")
    fit = {"exp_slope": float(exp_coef[0]), "exp_r2": r2_exp, "lin_slope": float(lin_coef[0]),
           "lin_r2": r2_lin, "plateau_change": float(abs(last - mid) / mid), "ratio": ratio}
    if exp_coef[0] > 0.05 and r2_exp > 0.95 and r2_exp >= r2_lin:
        label = "exponential"
    elif r2_lin > 0.95 and lin_coef[0] > 0:
        label = "linear"
    elif fit["plateau_change"] < 0.05:
        label = "plateau"
    else:
        label = "undetermined"
    return label, fit


def ntk_trace_depth_scan(scheme, width: int, depths, inputs=None, ensembles: int = 16,
                         seed: int = 0, omega0: float = 1.0) -> NtkTraceScan:
    """Mean normalized NTK trace ``Tr K / (|I| N)`` for each depth, then classify."""
    depths = list(depths)
    x = _grid(np.linspace(-1.0, 1.0, 200) if inputs is None else inputs)
    if x.shape[0] > MAX_NTK_POINTS:
        raise MemoryError(f"{x.shape[0]} inputs exceeds the NTK guard of {MAX_NTK_POINTS}")
    scheme = _scheme(scheme)
    root = Rng(seed)
    out = []
    for L in depths:
        params = resolve_scheme(scheme, omega0, x.shape[1], width, L)
        stream = root.split(L)
        tr = [ntk_trace(sample_network(params, stream.split(e), seed), x) for e in range(ensembles)]
        out.append(np.mean(tr) / (x.shape[0] * width))
    out = np.array(out)
    label, fit = classify_growth(depths, out)
    return NtkTraceScan(scheme.label, width, depths, out, label, fit, seed)


def linearized_dynamics(ntk: NtkResult, u0, times) -> np.ndarray:
    """Residuals ``u(t) = sum_i exp(-t lambda_i) <u0, v_i> v_i``, one row per time."""
    if ntk.eigenvalues is None:
        raise ValueError("NtkResult carries no eigendecomposition")
    u0 = np.asarray(u0, dtype=np.float64)
    t = np.atleast_1d(np.asarray(times, dtype=np.float64))
    if u0.shape != (ntk.eigenvectors.shape[0],):
        raise ValueError("u0 length must equal the number of NTK inputs")
    if np.any(t < 0):
        raise ValueError("times must be non-negative")
    v = ntk.eigenvectors
    coef = v.T @ u0
    return (np.exp(-np.outer(t, ntk.eigenvalues)) * coef) @ v.T


def eigen_result(k) -> NtkResult:
    """Wrap an arbitrary symmetric kernel matrix as an :class:`NtkResult`."""
    k = np.asarray(k, dtype=np.float64)
    w, v = eigh_symmetric(k)
    return NtkResult(k, w, v, float(np.trace(k)) / k.shape[0], 1)


# --------------------------------------------------------------- spectrum

@dataclass
class SpectrumReport:
    bins: np.ndarray          # 0..M/2
    frequencies: np.ndarray   # angular, 2 pi k / (b - a)
    magnitudes: np.ndarray
    cutoff_bin: int
    cutoff_energy_fraction: float
    signal_energy: float
    spectrum_energy: float    # sum |S_k|^2 / M over the full spectrum

    def rows(self) -> list[dict]:
        return [{"bin": int(k), "frequency": float(f), "magnitude": float(m),
                 "above_cutoff": bool(k >= self.cutoff_bin),
                 "cutoff_energy_fraction": self.cutoff_energy_fraction}
                for k, f, m in zip(self.bins, self.frequencies, self.magnitudes)]


def cutoff_bin(omega0: float, a: float, b: float) -> int:
    return int(math.ceil(omega0 * (b - a) / (2.0 * math.pi) - 1e-12))


def signal_spectrum(values, a: float, b: float, omega0: float) -> SpectrumReport:
    """Spectrum of samples on a uniform grid over ``[a, b)``.

    Bin ``k`` is angular frequency ``2 pi k / (b - a)``; the energy fraction
    counts bins ``k >= ceil(omega0 (b - a) / 2 pi)`` among bins 1..M/2.
    """
    s = np.asarray(values, dtype=np.float64).ravel()
    m = s.shape[0]
    kc = cutoff_bin(omega0, a, b)
    if kc > m // 2:
        raise ValueError(f"omega0={omega0} maps to bin {kc}, above the Nyquist bin {m // 2}")
    full = dft_1d(s)
    mag = np.abs(full[: m // 2 + 1])
    power = mag[1:] ** 2
    total = power.sum()
    frac = float(power[kc - 1:].sum() / total) if total > 0 else 0.0
    bins = np.arange(m // 2 + 1)
    return SpectrumReport(bins, 2.0 * math.pi * bins / (b - a), mag, kc, frac,
                          float(np.sum(s * s)), float(np.sum(np.abs(full) ** 2) / m))


def uniform_grid(m: int, a: float = -1.0, b: float = 1.0) -> np.ndarray:
    """``m`` points on ``[a, b)``, endpoint excluded so the grid is periodic."""
    return a + (b - a) * np.arange(m) / m


def output_spectrum(net: SirenNet, grid, omega0: float | None = None,
                    domain: tuple[float, float] | None = None) -> SpectrumReport:
    grid = np.asarray(grid, dtype=np.float64).ravel()
    if domain is None:
        step = grid[1] - grid[0]
        domain = (grid[0], grid[-1] + step)
    y = net(grid[:, None]).ravel()
    return signal_spectrum(y, domain[0], domain[1], net.omega0 if omega0 is None else omega0)


@dataclass
class SpectrumScan:
    scheme: str
    width: int
    depths: list
    omega0: float
    fractions: np.ndarray
    mean_magnitudes: list

    def rows(self) -> list[dict]:
        out = []
        for L, f, mag in zip(self.depths, self.fractions, self.mean_magnitudes):
            for k, v in enumerate(mag):
                out.append({"scheme": self.scheme, "L": L, "N": self.width, "bin": k,
                            "magnitude": float(v), "cutoff_energy_fraction": float(f)})
        return out


def spectrum_depth_scan(scheme, width: int, depths, omega0: float, points: int = 2048,
                        ensembles: int = 5, seed: int = 0, domain=(-1.0, 1.0)) -> SpectrumScan:
    """Mean cutoff energy fraction of freshly initialized nets at each depth."""
    scheme = _scheme(scheme)
    grid = uniform_grid(points, *domain)
    root = Rng(seed)
    fracs, mags = [], []
    for L in depths:
        params = resolve_scheme(scheme, omega0, 1, width, L)
        stream = root.split(L)
        reps = [output_spectrum(sample_network(params, stream.split(e), seed), grid, omega0, domain)
                for e in range(ensembles)]
        fracs.append(np.mean([r.cutoff_energy_fraction for r in reps]))
        mags.append(np.mean([r.magnitudes for r in reps], axis=0))
    return SpectrumScan(scheme.label, width, list(depths), omega0, np.array(fracs), mags)


# ---------------------------------------------------------------- overlap

@dataclass
class OverlapMap:
    """``power[n, k] = |<v_n, phi_k>|^2`` with unit-norm discrete Fourier vectors.

    Columns follow numpy's fft ordering (bin ``k`` and ``k - M`` for the
    negative half); ``frequencies`` gives the matching angular frequencies.
    """

    power: np.ndarray
    frequencies: np.ndarray
    omega0: float | None

    def mean_abs_frequency(self) -> np.ndarray:
        return self.power @ np.abs(self.frequencies)

    def rows(self) -> list[dict]:
        order = np.argsort(self.frequencies, kind="stable")
        return [{"eigen_index": n, "frequency": float(self.frequencies[k]),
                 "overlap": float(self.power[n, k]),
                 "omega0": self.omega0 if self.omega0 is not None else ""}
                for n in range(self.power.shape[0]) for k in order]


def fourier_overlap(ntk: NtkResult, grid=None, domain=None, omega0=None,
                    n_vectors: int | None = None) -> OverlapMap:
    """Project NTK eigenvectors onto unit-norm discrete Fourier modes.

    With ``phi_k[n] = exp(2 pi i k n / M) / sqrt(M)`` the overlaps of a
    unit eigenvector sum to one over ``k`` (Parseval).
    """
    if ntk.eigenvectors is None:
        raise ValueError("NtkResult carries no eigenvectors")
    v = ntk.eigenvectors
    m = v.shape[0]
    if domain is None:
        if grid is None:
            domain = (0.0, float(m))
        else:
            g = np.asarray(grid, dtype=float).ravel()
            domain = (g[0], g[-1] + (g[1] - g[0]))
    count = m if n_vectors is None else min(n_vectors, m)
    power = np.empty((count, m))
    for n in range(count):
        power[n] = np.abs(dft_1d(v[:, n])) ** 2 / m
    k = np.arange(m)
    signed = np.where(k <= m // 2, k, k - m)
    return OverlapMap(power, 2.0 * math.pi * signed / (domain[1] - domain[0]), omega0)


def overlap_trend(overlap: OverlapMap, n_vectors: int = 6) -> bool:
    """Mean |frequency| of the leading eigenvectors grows with eigen-index."""
    mf = overlap.mean_abs_frequency()[:n_vectors]
    return bool(np.polyfit(np.arange(mf.size), mf, 1)[0] > 0)


# -------------------------------------------------------- singular values

@dataclass
class SingularSpectrum:
    scheme: str
    width: int
    depths: list
    mean_singular_values: list
    max_singular_value: np.ndarray
    omega0: float
    seed: int

    def rows(self) -> list[dict]:
        out = []
        for L, sv, mx in zip(self.depths, self.mean_singular_values, self.max_singular_value):
            for i, s in enumerate(sv):
                out.append({"scheme": self.scheme, "L": L, "N": self.width, "index": i,
                            "singular_value": float(s), "max_singular_value": float(mx),
                            "omega0": self.omega0, "seed": self.seed})
        return out


def jacobian_singular_spectrum(scheme, width: int, depths, sample_points=10, ensembles: int = 5,
                               seed: int = 0, omega0: float = 30.0,
                               domain=(-math.pi, math.pi)) -> SingularSpectrum:
    """Singular values of ``d h_{L-1} / d h_1`` averaged over samples and ensembles.

    ``sample_points`` is a count (evenly spaced over ``domain``) or an array.
    ``max_singular_value`` is the mean top singular value, the gain of the
    hidden stack on a unit-norm perturbation of ``h_1``.
    """
    scheme = _scheme(scheme)
    if np.ndim(sample_points) == 0:
        x = np.linspace(domain[0], domain[1], int(sample_points))
    else:
        x = np.asarray(sample_points, dtype=float)
    x = _grid(x)
    root = Rng(seed)
    means, maxes = [], []
    for L in depths:
        if L < 3:
            raise ValueError("end-to-end Jacobian needs depth >= 3")
        params = resolve_scheme(scheme, omega0, x.shape[1], width, L)
        stream = root.split(L)
        acc = []
        for e in range(ensembles):
            net = sample_network(params, stream.split(e), seed)
            jac = end_to_end_jacobians_batched(net, forward(net, x))
            acc.extend(singular_values(j) for j in jac)
        acc = np.array(acc)
        means.append(acc.mean(axis=0))
        maxes.append(acc[:, 0].mean())
    return SingularSpectrum(scheme.label, width, list(depths), means, np.array(maxes), omega0, seed)


# ----------------------------------------------------------------- export

def write_csv(rows, path_or_file) -> None:
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    fields = list(rows[0])
    for r in rows[1:]:
        fields.extend(k for k in r if k not in fields)
    own = isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__")
    fh = open(path_or_file, "w", newline="") if own else path_or_file
    try:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if own:
            fh.close()


def csv_text(rows) -> str:
    buf = io.StringIO()
    write_csv(rows, buf)
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return obj


def to_json(report, config: dict | None = None) -> str:
    """Nested JSON of a report dataclass, with the run config echoed alongside."""
    body = asdict(report) if hasattr(report, "__dataclass_fields__") else report
    return json.dumps({"config": _jsonable(config or {}), "report": _jsonable(body)}, indent=1)

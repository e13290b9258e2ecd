"""Closed-form initialization algebra and parameter sampling for sine networks.

Notation: hidden weights are drawn from ``U(-c_w/sqrt(N), c_w/sqrt(N))`` and
biases from ``N(0, c_b**2)``; ``sigma_a`` is the limiting pre-activation
standard deviation and ``sigma_g`` the limiting ``sqrt(N * Var)`` of the
layer-to-layer Jacobian entries.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import Rng
from .mathfn import BRANCH_POINT, DOMAIN_TOL, DomainError, lambert_w0

CLAMP_TOL = 1e-12

SIGMA1_CW = math.sqrt(6.0 / (1.0 + math.exp(-2.0)))
SIGMA1_CB = SIGMA1_CW * math.exp(-1.0) / math.sqrt(3.0)
PROPOSED_CW = math.sqrt(3.0)

SCHEME_NAMES = ("proposed-sigma0", "sigma1", "sitzmann", "framework-default", "custom")


@dataclass(frozen=True)
class FixedPointReport:
    sigma_a: float
    sigma_g: float
    converged: bool
    iterations: int


def sigma_a_closed_form(c_w: float, c_b: float) -> float:
    """Fixed-point pre-activation std via the principal Lambert branch."""
    if c_w <= 0:
        raise ValueError(f"c_w must be positive, got {c_w}")
    a = c_w * c_w / 3.0
    arg = -a * math.exp(-a - 2.0 * c_b * c_b)
    if arg < BRANCH_POINT - DOMAIN_TOL:
        raise DomainError(f"Lambert argument {arg} below -1/e for c_w={c_w}, c_b={c_b}")
    arg = max(arg, BRANCH_POINT)
    radicand = c_b * c_b + a / 2.0 + 0.5 * lambert_w0(arg)
    if radicand < -CLAMP_TOL:
        raise DomainError(f"negative variance {radicand} for c_w={c_w}, c_b={c_b}")
    return math.sqrt(max(radicand, 0.0))


def variance_map(var: float, c_w: float, c_b: float) -> float:
    """One layer of the pre-activation variance recursion."""
    return c_w * c_w / 6.0 * (1.0 - math.exp(-2.0 * var)) + c_b * c_b


def sigma_a_fixed_point_iterate(c_w: float, c_b: float, tol: float = 1e-14,
                                max_iter: int = 10_000) -> FixedPointReport:
    """Iterate the variance map from ``var = 1`` until the step drops below ``tol``.

    At ``c_w = sqrt(3), c_b = 0`` the map approaches zero only like 1/iteration,
    so with a tight ``tol`` the report will say ``converged=False``.
    """
    if c_w <= 0 or tol <= 0:
        raise ValueError("c_w and tol must be positive")
    var = 1.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        nxt = variance_map(var, c_w, c_b)
        step = abs(nxt - var)
        var = nxt
        if step <= tol:
            converged = True
            break
    s_a = math.sqrt(max(var, 0.0))
    return FixedPointReport(s_a, sigma_g(c_w, s_a), converged, it)


def sigma_g(c_w: float, sigma_a: float) -> float:
    """Limiting ``sqrt(N * Var)`` of Jacobian entries for a given fixed point."""
    if c_w <= 0 or sigma_a < 0:
        raise ValueError("need c_w > 0 and sigma_a >= 0")
    return math.sqrt(c_w * c_w / 6.0 * (1.0 + math.exp(-2.0 * sigma_a * sigma_a)))


def curve_radicand(c_w: float) -> float:
    return 1.0 - c_w * c_w / 3.0 - 0.5 * math.log(6.0 / (c_w * c_w) - 1.0)


def c_b_on_curve(c_w: float) -> float:
    """Bias std that puts ``(c_w, c_b)`` on the ``sigma_g = 1`` curve.

    Valid for ``sqrt(3) <= c_w < sqrt(6)``; below ``sqrt(3)`` the implied
    fixed-point variance ``-log(6/c_w**2 - 1)/2`` would be negative.
    """
    if not 0 < c_w < math.sqrt(6.0):
        raise DomainError(f"c_w={c_w} outside (0, sqrt(6))")
    if -0.5 * math.log(6.0 / (c_w * c_w) - 1.0) < -CLAMP_TOL:
        raise DomainError(f"c_w={c_w} below sqrt(3): no non-negative fixed point on the curve")
    rad = curve_radicand(c_w)
    if rad < -CLAMP_TOL:
        raise DomainError(f"c_w={c_w} is off the valid arc (radicand {rad})")
    return math.sqrt(max(rad, 0.0))


@dataclass(frozen=True)
class InitScheme:
    """Named initialization scheme.

    ``custom`` with only ``c_w`` places the scheme on the ``sigma_g = 1``
    curve; with both ``c_w`` and ``c_b`` it is taken as given.
    """

    name: str
    c_w: float | None = None
    c_b: float | None = None

    def __post_init__(self):
        if self.name not in SCHEME_NAMES:
            raise ValueError(f"unknown scheme {self.name!r}; choose from {SCHEME_NAMES}")
        if self.name == "custom":
            if self.c_w is None:
                raise ValueError("custom scheme needs c_w")
            if self.c_b is None:
                c_b_on_curve(self.c_w)

    @classmethod
    def parse(cls, text: str) -> "InitScheme":
        """``"sitzmann"``, ``"custom:2.0"`` (on curve) or ``"custom:2.0,0.3"``."""
        name, _, rest = text.partition(":")
        if not rest:
            return cls(name)
        vals = [float(v) for v in rest.split(",")]
        if len(vals) == 1:
            return cls(name, vals[0])
        return cls(name, vals[0], vals[1])

    @property
    def label(self) -> str:
        if self.name != "custom":
            return self.name
        if self.c_b is None:
            return f"custom:{self.c_w!r}"
        return f"custom:{self.c_w!r},{self.c_b!r}"


@dataclass(frozen=True)
class Dist:
    kind: str  # "uniform" (half-width) or "normal" (std)
    scale: float

    @property
    def variance(self) -> float:
        return self.scale**2 / 3.0 if self.kind == "uniform" else self.scale**2


@dataclass(frozen=True)
class LayerSpec:
    fan_in: int
    fan_out: int
    weight: Dist
    bias: Dist


@dataclass(frozen=True)
class InitParams:
    scheme: InitScheme
    c_w: float
    c_b: float
    omega0: float
    n0: int
    width: int
    depth: int
    d_out: int = 1
    layers: tuple[LayerSpec, ...] = field(default=(), repr=False)

    @property
    def effective_c_b(self) -> float:
        """Bias std of the hidden layers, whatever the bias distribution."""
        return math.sqrt(self.layers[1].bias.variance) if self.depth > 1 else self.c_b

    def sigma_a(self) -> float:
        return sigma_a_closed_form(self.c_w, self.effective_c_b)

    def sigma_g(self) -> float:
        return sigma_g(self.c_w, self.sigma_a())


def resolve_scheme(scheme, omega0: float, n0: int, width: int, depth: int,
                   d_out: int = 1) -> InitParams:
    """Turn a scheme into per-layer weight and bias distributions."""
    if isinstance(scheme, str):
        scheme = InitScheme.parse(scheme)
    if omega0 <= 0:
        raise ValueError(f"omega0 must be positive, got {omega0}")
    if width < 1 or n0 < 1 or d_out < 1:
        raise ValueError("dimensions must be >= 1")
    if depth < 2:
        raise ValueError(f"depth must be >= 2, got {depth}")
    n = width
    if scheme.name == "proposed-sigma0":
        c_w, c_b = PROPOSED_CW, 0.0
    elif scheme.name == "sigma1":
        c_w, c_b = SIGMA1_CW, SIGMA1_CB
    elif scheme.name == "sitzmann":
        c_w, c_b = math.sqrt(6.0), 1.0 / math.sqrt(3.0 * n)
    elif scheme.name == "framework-default":
        c_w, c_b = 1.0, 1.0 / math.sqrt(3.0 * n)
    else:
        c_w = scheme.c_w
        c_b = scheme.c_b if scheme.c_b is not None else c_b_on_curve(c_w)
        if c_w <= 0 or c_b < 0:
            raise ValueError("custom scheme needs c_w > 0 and c_b >= 0")

    dims = [n0] + [n] * (depth - 1) + [d_out]
    layers = []
    for ell in range(depth):
        fan_in, fan_out = dims[ell], dims[ell + 1]
        if ell == 0:
            w = Dist("uniform", omega0 / n0)
        elif scheme.name == "sitzmann":
            w = Dist("uniform", math.sqrt(6.0 / n))
        elif scheme.name == "framework-default":
            w = Dist("uniform", 1.0 / math.sqrt(fan_in))
        else:
            w = Dist("uniform", c_w / math.sqrt(n))
        if scheme.name == "sitzmann":
            b = Dist("uniform", 1.0 / math.sqrt(n))
        elif scheme.name == "framework-default":
            b = Dist("uniform", 1.0 / math.sqrt(fan_in))
        else:
            b = Dist("normal", c_b)
        layers.append(LayerSpec(fan_in, fan_out, w, b))
    return InitParams(scheme, c_w, c_b, float(omega0), n0, n, depth, d_out, tuple(layers))


def _draw(dist: Dist, shape, rng: Rng) -> np.ndarray:
    if dist.kind == "uniform":
        if dist.scale == 0:
            return np.zeros(shape)
        return rng.uniform(-dist.scale, dist.scale, size=shape)
    return rng.normal(0.0, dist.scale, size=shape)


def sample_network(params: InitParams, rng, seed: int | None = None):
    """Draw a fresh network; layer by layer, weights (row-major) then bias."""
    from .network import SirenNet

    if isinstance(rng, int):
        seed, rng = rng, Rng(rng)
    weights, biases = [], []
    for spec in params.layers:
        weights.append(_draw(spec.weight, (spec.fan_out, spec.fan_in), rng))
        biases.append(_draw(spec.bias, (spec.fan_out,), rng))
    return SirenNet(weights, biases, omega0=params.omega0,
                    scheme=params.scheme.label, seed=seed)


def init_network(scheme, omega0: float, n0: int, width: int, depth: int,
                 seed: int | Rng = 0, d_out: int = 1):
    """Resolve ``scheme`` and sample a network in one call."""
    params = resolve_scheme(scheme, omega0, n0, width, depth, d_out)
    if isinstance(seed, Rng):
        return sample_network(params, seed, seed.seed)
    return sample_network(params, Rng(seed), seed)

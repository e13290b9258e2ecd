"""Sine-activated networks at the edge of chaos: initialization, diagnostics, experiments."""
__version__ = "0.1.0"

from ._backend import name as backend
from .initialization import (
    InitParams,
    InitScheme,
    c_b_on_curve,
    init_network,
    resolve_scheme,
    sample_network,
    sigma_a_closed_form,
    sigma_a_fixed_point_iterate,
    sigma_g,
)
from .linalg import Rng, dft_1d, eigh_symmetric, matmul, singular_values
from .mathfn import DomainError, lambert_w0
from .network import (
    ForwardTrace,
    SirenNet,
    end_to_end_jacobian,
    forward,
    input_gradient,
    layer_jacobian,
    ntk_feature,
    param_gradient,
)

__all__ = [
    "DomainError", "ForwardTrace", "InitParams", "InitScheme", "Rng", "SirenNet", "backend",
    "c_b_on_curve", "dft_1d", "eigh_symmetric", "end_to_end_jacobian", "forward", "init_network",
    "input_gradient", "lambert_w0", "layer_jacobian", "matmul", "ntk_feature", "param_gradient",
    "resolve_scheme", "sample_network", "sigma_a_closed_form", "sigma_a_fixed_point_iterate",
    "sigma_g", "singular_values",
]

"""Nonlocal operators, their quadratures and the analytic constants."""

from .operators import (
    QUADRATURE,
    SPECTRAL,
    OperatorBackend,
    ResolutionWarning,
    default_backend,
    dissipation_density,
    drift_prefactor,
    drift_velocity,
    frac_laplacian,
    frac_laplacian_constant,
    hilbert,
    riesz_constant,
)

__all__ = [
    "QUADRATURE",
    "SPECTRAL",
    "OperatorBackend",
    "ResolutionWarning",
    "default_backend",
    "dissipation_density",
    "drift_prefactor",
    "drift_velocity",
    "frac_laplacian",
    "frac_laplacian_constant",
    "hilbert",
    "riesz_constant",
]

from .constants import Constants, ConstantValue, analytic_constants, derive_constants  # noqa: E402
from .identities import (  # noqa: E402
    IdentityReport,
    barrier_function,
    identity_suite,
    lambda_barrier_check,
    prop_identity_residual,
)

__all__ += [
    "Constants",
    "ConstantValue",
    "analytic_constants",
    "derive_constants",
    "IdentityReport",
    "barrier_function",
    "identity_suite",
    "lambda_barrier_check",
    "prop_identity_residual",
]

"""Pseudo-Laplacians on flat tori and the round 3-sphere.

Scattering coefficients, secular eigenvalues, the rank-one trace identity
and zeta-regularized determinants.
"""

from .models import Kind, LatticeBasis, ManifoldModel, SpectrumTable, enumerate_levels, heat_trace, resolvent_kernel
from .numerics import ConvergenceError, Tolerance, bessel_k0
from .pseudospectrum import (
    PseudoSpectrum,
    SecularRoot,
    krein_resolvent,
    secular_roots,
    trace_difference,
    verify_trace_identity,
)
from .scattering import (
    ExtensionParam,
    PoleError,
    ScatterEval,
    f_asymptotic,
    f_closed,
    f_diff_spectral,
    f_prime,
    krein_coefficient,
    shift_derivative,
)
from .zetadet import (
    RelativeZetaParams,
    SignedLogDet,
    logdet_pseudo_at_zero,
    logdet_pseudo_theorem,
    logdet_star,
    logdet_unperturbed,
    relative_zeta_prime_numeric,
    theorem_ratio,
)

__version__ = "0.1.0"

__all__ = [
    "Kind", "LatticeBasis", "ManifoldModel", "SpectrumTable", "enumerate_levels", "heat_trace",
    "resolvent_kernel", "ConvergenceError", "Tolerance", "bessel_k0", "PseudoSpectrum", "SecularRoot",
    "krein_resolvent", "secular_roots", "trace_difference", "verify_trace_identity", "ExtensionParam",
    "PoleError", "ScatterEval", "f_asymptotic", "f_closed", "f_diff_spectral", "f_prime",
    "krein_coefficient", "shift_derivative", "RelativeZetaParams", "SignedLogDet",
    "logdet_pseudo_at_zero", "logdet_pseudo_theorem", "logdet_star", "logdet_unperturbed",
    "relative_zeta_prime_numeric", "theorem_ratio",
]

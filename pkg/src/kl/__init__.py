"""Karhunen-Loève machinery on a time quadrature grid."""

from .spectrum import (
    Spectrum,
    nystrom_eig,
    variance_ratio,
    nkl_for_ratio,
    truncated_pointwise_variance,
    normalized_eigenvalues,
    spectrum_table,
    spectrum_convergence,
    truncated_variance_curves
)
from .modes import KLModes, KLSurrogate, kl_modes, fit_mode_surrogates, build_kl_surrogate

__all__ = [
    'Spectrum',
    'nystrom_eig',
    'variance_ratio',
    'nkl_for_ratio',
    'truncated_pointwise_variance',
    'normalized_eigenvalues',
    'spectrum_table',
    'spectrum_convergence',
    'truncated_variance_curves',
    'KLModes',
    'KLSurrogate',
    'kl_modes',
    'fit_mode_surrogates',
    'build_kl_surrogate'
]

"""Generalized Sobol' sensitivity indices for time-dependent processes."""

from .subsets import SubsetU, singletons
from .reports import METHODS, SobolEntry, SobolReport, PointwiseIndices, FixingReport
from .pointwise import pointwise_indices_from_pce, generalized_from_pointwise, pointwise_report
from .spectral import generalized_spectral, spectral_report
from .montecarlo import generalized_mc, generalized_mc_many, generalized_mc_windows
from .window import growing_window, window_frame, total_variation, ordering_changes
from .fixing import (
    MARKOV_LEVELS,
    nominal_design,
    markov_table,
    fixing_error,
    reduced_model_bands,
    reduced_model_variance,
    band_coverage
)

__all__ = [
    'SubsetU',
    'singletons',
    'METHODS',
    'SobolEntry',
    'SobolReport',
    'PointwiseIndices',
    'FixingReport',
    'pointwise_indices_from_pce',
    'generalized_from_pointwise',
    'pointwise_report',
    'generalized_spectral',
    'spectral_report',
    'generalized_mc',
    'generalized_mc_many',
    'generalized_mc_windows',
    'growing_window',
    'window_frame',
    'total_variation',
    'ordering_changes',
    'MARKOV_LEVELS',
    'nominal_design',
    'markov_table',
    'fixing_error',
    'reduced_model_bands',
    'reduced_model_variance',
    'band_coverage'
]

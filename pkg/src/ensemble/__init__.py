"""Ensembles of model evaluations and covariance estimation."""

from .sampling import (
    MONTE_CARLO,
    QUADRATURE,
    SampleSet,
    make_rng,
    draw_samples,
    samples_from_rule
)
from .ensemble import (
    Ensemble,
    weighted_mean,
    evaluate_batch,
    evaluate_ensemble,
    center,
    pointwise_variance,
    subsample,
    restrict
)
from .covariance import CovMatrix, sample_covariance, synthesize_covariance

__all__ = [
    'MONTE_CARLO',
    'QUADRATURE',
    'SampleSet',
    'make_rng',
    'draw_samples',
    'samples_from_rule',
    'Ensemble',
    'weighted_mean',
    'evaluate_batch',
    'evaluate_ensemble',
    'center',
    'pointwise_variance',
    'subsample',
    'restrict',
    'CovMatrix',
    'sample_covariance',
    'synthesize_covariance'
]

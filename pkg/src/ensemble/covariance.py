"""Covariance matrices K_lm ≈ c(t_l, t_m) of a process on its time grid."""

from dataclasses import dataclass

import numpy as np

from ensemble.ensemble import Ensemble
from errors import EnsembleError


@dataclass(frozen=True, eq=False)
class CovMatrix:
    """Discretized covariance function.

    Attributes:
        K: Symmetric (N_quad, N_quad) matrix
        estimator: ``"sample-<N>"``, a quadrature rule id, or ``"pce-<id>"``
    """
    K: np.ndarray
    estimator: str

    @property
    def size(self) -> int:
        return self.K.shape[0]

    def weighted_trace(self, weights: np.ndarray) -> float:
        """Sum_m w_m K_mm, the time integral of the variance."""
        return float(np.dot(weights, np.diag(self.K)))


def _symmetric(K: np.ndarray) -> np.ndarray:
    return 0.5 * (K + K.T)


def sample_covariance(e: Ensemble) -> CovMatrix:
    """Covariance of a centered ensemble.

    Monte Carlo ensembles use the unbiased divisor N - 1; quadrature
    ensembles use the deterministic weights nu_j without correction.

    Raises:
        EnsembleError: If the ensemble is not centered, or N < 2 under Monte Carlo
    """
    if not e.centered:
        raise EnsembleError("sample_covariance needs a centered ensemble")
    fc = e.values
    if e.samples.is_quadrature:
        K = (fc * e.samples.averaging_weights()[None, :]) @ fc.T
        estimator = e.samples.rule_id or "quadrature"
    else:
        if e.N < 2:
            raise EnsembleError(f"Monte Carlo covariance needs N >= 2, got N={e.N}")
        K = fc @ fc.T / (e.N - 1)
        estimator = f"sample-{e.N}"
    return CovMatrix(K=_symmetric(K), estimator=estimator)


def synthesize_covariance(expansion) -> CovMatrix:
    """Covariance of a per-node PC expansion.

    ``K_lm = sum_{k>=1} c_k(t_l) c_k(t_m) ||Psi_k||^2``; the constant term
    carries the mean and drops out.
    """
    coeffs = np.atleast_2d(expansion.coeffs)
    scaled = coeffs[:, 1:] * np.sqrt(expansion.basis.norms[1:])[None, :]
    return CovMatrix(K=_symmetric(scaled @ scaled.T), estimator=f"pce-order{expansion.basis.order}")

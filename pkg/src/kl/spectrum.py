"""Nyström eigendecomposition of the discretized covariance operator.

The weighted problem ``K W e = lambda e`` is solved in its symmetric form
``W^{1/2} K W^{1/2} u = lambda u`` with ``e = W^{-1/2} u``, so the
eigenvectors are orthonormal in the W-inner product.
"""

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
import pandas as pd
from scipy.sparse.linalg import ArpackError, eigsh

from config import Config
from ensemble import CovMatrix, Ensemble, center, sample_covariance, subsample
from errors import DataQualityError, DegenerateVarianceError, EnsembleError
from quadrature import TimeRule

config = Config()
logger = logging.getLogger(__name__)

METHODS = ("auto", "dense", "lanczos")


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenpairs of the covariance operator on the time grid.

    Attributes:
        eigenvalues: Descending, clipped at zero
        eigenvectors: Shape (N_quad, k), column i is e_i on the grid
        weights: Time quadrature weights W
        trace: Full weighted trace sum_m w_m K_mm
        clipped: Magnitude of the most negative eigenvalue removed by clipping
        method: ``"dense"`` or ``"lanczos"``
    """
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    weights: np.ndarray
    trace: float
    clipped: float = 0.0
    method: str = "dense"

    @property
    def count(self) -> int:
        return len(self.eigenvalues)


def _dense(A: np.ndarray, k: int):
    lam, U = np.linalg.eigh(A)
    return lam[::-1][:k], U[:, ::-1][:, :k]


def _lanczos(A: np.ndarray, k: int):
    v0 = np.full(A.shape[0], 1.0 / np.sqrt(A.shape[0]))
    lam, U = eigsh(A, k=k, which="LA", v0=v0, tol=0)
    order = np.argsort(lam)[::-1]
    return lam[order], U[:, order]


def nystrom_eig(
    cov: CovMatrix,
    time_rule: TimeRule,
    k: Optional[int] = None,
    method: str = "auto"
) -> Spectrum:
    """Eigenpairs of ``W^{1/2} K W^{1/2}`` mapped back to W-orthonormal vectors.

    Args:
        cov: Covariance matrix on the nodes of ``time_rule``
        time_rule: Time quadrature supplying the weights W
        k: Number of eigenpairs (default: all)
        method: ``"dense"``, ``"lanczos"``, or ``"auto"`` (Lanczos when
            ``k < Config.LANCZOS_RATIO * N_quad``)

    Returns:
        Spectrum with descending eigenvalues

    Raises:
        DataQualityError: If K is not symmetric or has an eigenvalue below
            ``-Config.EIG_CLIP_RTOL * lambda_1``
    """
    K = cov.K
    n = time_rule.size
    if K.shape != (n, n):
        raise EnsembleError(f"covariance is {K.shape}, time grid has {n} nodes")
    if np.any(time_rule.weights <= 0):
        raise DataQualityError("time quadrature weights must be positive")
    scale = max(float(np.max(np.abs(K))), np.finfo(float).tiny)
    if np.max(np.abs(K - K.T)) > 1e-10 * scale:
        raise DataQualityError("covariance matrix is not symmetric")
    if method not in METHODS:
        raise EnsembleError(f"unknown eigen method '{method}'")

    k = n if k is None else min(int(k), n)
    if method == "auto":
        method = "lanczos" if k < config.LANCZOS_RATIO * n else "dense"
    if method == "lanczos" and k >= n - 1:
        method = "dense"

    sw = np.sqrt(time_rule.weights)
    A = sw[:, None] * K * sw[None, :]
    A = 0.5 * (A + A.T)

    if method == "lanczos":
        try:
            lam, U = _lanczos(A, k)
        except ArpackError as e:
            logger.warning(f"Lanczos failed for {k} eigenpairs ({e}); falling back to dense solver")
            method = "dense"
    if method == "dense":
        lam, U = _dense(A, k)

    top = max(float(lam[0]), 0.0)
    most_negative = float(min(lam.min(), 0.0))
    if most_negative < -config.EIG_CLIP_RTOL * top:
        raise DataQualityError(
            f"covariance has eigenvalue {most_negative:.3e} below -{config.EIG_CLIP_RTOL:g} x lambda_1 ({top:.3e})"
        )
    clipped = -most_negative
    if clipped > 0:
        logger.info(f"Clipped negative eigenvalues of magnitude up to {clipped:.3e}")

    vectors = U / sw[:, None]
    # Deterministic sign: largest-magnitude entry positive
    peaks = vectors[np.argmax(np.abs(vectors), axis=0), np.arange(vectors.shape[1])]
    vectors = vectors * np.where(peaks < 0, -1.0, 1.0)[None, :]

    return Spectrum(
        eigenvalues=np.maximum(lam, 0.0),
        eigenvectors=vectors,
        weights=time_rule.weights,
        trace=cov.weighted_trace(time_rule.weights),
        clipped=clipped,
        method=method,
    )


def variance_ratio(s: Spectrum, Nkl: int) -> float:
    """Fraction of the weighted trace carried by the first Nkl eigenvalues.

    Raises:
        DegenerateVarianceError: If the trace is zero
    """
    if Nkl < 1:
        raise EnsembleError(f"Nkl must be >= 1, got {Nkl}")
    if s.trace <= 0:
        raise DegenerateVarianceError("covariance trace is zero; truncation ratio undefined")
    return min(float(np.sum(s.eigenvalues[:Nkl])) / s.trace, 1.0)


def nkl_for_ratio(s: Spectrum, target: float) -> int:
    """Smallest Nkl whose variance ratio reaches ``target``."""
    ratios = np.cumsum(s.eigenvalues) / s.trace if s.trace > 0 else np.ones(s.count)
    hits = np.flatnonzero(ratios >= target)
    return int(hits[0]) + 1 if hits.size else s.count


def truncated_pointwise_variance(s: Spectrum, Nkl: int, m: Optional[int] = None):
    """sum_{i<=Nkl} lambda_i e_i(t_m)^2 at node ``m`` (every node when ``m`` is None)."""
    e = s.eigenvectors[:, :Nkl]
    curve = (e ** 2) @ s.eigenvalues[:Nkl]
    return curve if m is None else float(curve[m])


def normalized_eigenvalues(s: Spectrum, mode: str = "first") -> np.ndarray:
    """Eigenvalues divided by lambda_1 (``"first"``) or by the weighted trace (``"trace"``)."""
    if mode == "first":
        denom = s.eigenvalues[0] if s.count else 0.0
    elif mode == "trace":
        denom = s.trace
    else:
        raise EnsembleError(f"unknown normalization '{mode}'")
    if denom <= 0:
        raise DegenerateVarianceError("cannot normalize a zero spectrum")
    return s.eigenvalues / denom


def spectrum_table(s: Spectrum, mode: str = "first") -> pd.DataFrame:
    """Rows (i, lambda_i, normalized lambda_i, cumulative ratio r).

    ``mode`` picks the normalization as in ``normalized_eigenvalues``; a zero
    spectrum gets NaN instead of an error.
    """
    lam = s.eigenvalues
    if mode == "first":
        denom = lam[0] if s.count else 0.0
    elif mode == "trace":
        denom = s.trace
    else:
        raise EnsembleError(f"unknown normalization '{mode}'")
    cumulative = np.cumsum(lam) / s.trace if s.trace > 0 else np.full(s.count, np.nan)
    return pd.DataFrame({
        "i": np.arange(1, s.count + 1),
        "lambda": lam,
        "normalized": lam / denom if denom > 0 else np.full(s.count, np.nan),
        "ratio": np.minimum(cumulative, 1.0),
    })


def spectrum_convergence(
    e: Ensemble,
    sizes: Sequence[int],
    n_eigs: int = 5,
    mode: str = "first"
) -> pd.DataFrame:
    """Leading normalized eigenvalues computed from the first n samples, for each n in ``sizes``."""
    rows = []
    for n in sizes:
        sub = center(subsample(e, int(n)))
        s = nystrom_eig(sample_covariance(sub), e.time_rule, k=n_eigs)
        for i, value in enumerate(normalized_eigenvalues(s, mode), start=1):
            rows.append({"N": int(n), "i": i, "normalized": float(value)})
        logger.info(f"Spectrum at N={n}: lambda_1={s.eigenvalues[0]:.4e}")
    return pd.DataFrame(rows, columns=["N", "i", "normalized"])


def truncated_variance_curves(
    s: Spectrum,
    time_rule: TimeRule,
    nkls: Iterable[int],
    cov: Optional[CovMatrix] = None
) -> pd.DataFrame:
    """Pointwise variance of truncated expansions, one column per Nkl (plus K_mm when given)."""
    frame = pd.DataFrame({"t": time_rule.nodes})
    if cov is not None:
        frame["D"] = np.diag(cov.K)
    for nkl in nkls:
        frame[f"D_{nkl}"] = truncated_pointwise_variance(s, int(nkl))
    return frame

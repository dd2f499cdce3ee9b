"""Ensembles of process evaluations f(t_m, xi^(k)) and their centering."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from tqdm import tqdm

from config import Config
from ensemble.sampling import SampleSet
from errors import EnsembleError, ModelError, ModelEvaluationError, TimeSobolError
from quadrature import TimeRule

logger = logging.getLogger(__name__)

config = Config()


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Matrix of model evaluations on a time grid.

    Attributes:
        time_rule: Time quadrature the values are sampled on
        samples: Parameter draws (columns)
        values: Array of shape (N_quad, N)
        mean: Weighted column average f̄(t_m), shape (N_quad,)
        centered: True when ``values`` holds f - f̄
        model: Identifier of the generating model
        param_names: Names of the parameters
    """
    time_rule: TimeRule
    samples: SampleSet
    values: np.ndarray
    mean: np.ndarray
    centered: bool = False
    model: str = ""
    param_names: Tuple[str, ...] = ()

    def __post_init__(self):
        expected = (self.time_rule.size, self.samples.size)
        if self.values.shape != expected:
            raise EnsembleError(f"values have shape {self.values.shape}, expected {expected}")
        if self.mean.shape != (self.time_rule.size,):
            raise EnsembleError(f"mean has shape {self.mean.shape}, expected ({self.time_rule.size},)")

    @property
    def N(self) -> int:
        return self.samples.size

    @property
    def n_quad(self) -> int:
        return self.time_rule.size

    def raw_values(self) -> np.ndarray:
        """Uncentered values f(t_m, xi^(k))."""
        if self.centered:
            return self.values + self.mean[:, None]
        return self.values


def weighted_mean(values: np.ndarray, samples: SampleSet) -> np.ndarray:
    """Row-wise average of an (N_quad, N) matrix under the sampling scheme."""
    return values @ samples.averaging_weights()


def evaluate_batch(
    model,
    xis: np.ndarray,
    t: np.ndarray,
    max_workers: Optional[int] = None,
    show_progress: Optional[bool] = None
) -> np.ndarray:
    """Evaluate a model at many parameter vectors.

    Closed-form models with ``vectorized = True`` are evaluated in one call;
    all others are fanned out over a thread pool, one task per sample.

    Args:
        model: Object with ``evaluate(xi, t)`` (and optionally ``evaluate_many``)
        xis: Parameter vectors, shape (N, Np)
        t: Time grid
        max_workers: Thread pool size (default ``Config.MAX_WORKERS``)
        show_progress: Show a progress bar (default ``Config.SHOW_PROGRESS``)

    Returns:
        Array of shape (N, len(t))

    Raises:
        ModelEvaluationError: If the model fails at a sample; carries k and xi
    """
    xis = np.atleast_2d(np.asarray(xis, dtype=float))
    t = np.asarray(t, dtype=float)

    if getattr(model, "vectorized", False):
        out = np.asarray(model.evaluate_many(xis, t), dtype=float)
        bad = np.flatnonzero(~np.all(np.isfinite(out), axis=1))
        if bad.size:
            k = int(bad[0])
            raise ModelEvaluationError(k, xis[k], ModelError("non-finite model output"))
        return out

    def evaluate_one(k: int) -> np.ndarray:
        try:
            row = np.asarray(model.evaluate(xis[k], t), dtype=float)
        except ModelEvaluationError:
            raise
        except (TimeSobolError, ArithmeticError, ValueError) as e:
            raise ModelEvaluationError(k, xis[k], e) from e
        if row.shape != t.shape or not np.all(np.isfinite(row)):
            raise ModelEvaluationError(k, xis[k], ModelError("non-finite or misshapen model output"))
        return row

    workers = max_workers or config.MAX_WORKERS
    progress = config.SHOW_PROGRESS if show_progress is None else show_progress
    with ThreadPoolExecutor(max_workers=workers) as executor:
        rows = list(tqdm(
            executor.map(evaluate_one, range(len(xis))),
            total=len(xis),
            desc=getattr(model, "name", "model"),
            disable=not progress,
        ))
    return np.vstack(rows) if rows else np.zeros((0, t.size))


def evaluate_ensemble(
    model,
    samples: SampleSet,
    time_rule: TimeRule,
    max_workers: Optional[int] = None
) -> Ensemble:
    """Evaluate ``model`` at every draw and every time node.

    Example:
        >>> e = evaluate_ensemble(OscillatorModel(), draw_samples(3, 100, 7), uniform_time_rule(10, 0.01))
        >>> e.values.shape
        (1001, 100)
    """
    if samples.dim != model.dim:
        raise EnsembleError(f"model '{model.name}' takes {model.dim} parameters, samples have {samples.dim}")

    logger.info(
        f"Evaluating '{model.name}' at {samples.size} samples ({samples.scheme}) "
        f"on {time_rule.size} time nodes"
    )
    values = evaluate_batch(model, samples.draws, time_rule.nodes, max_workers).T.copy()
    return Ensemble(
        time_rule=time_rule,
        samples=samples,
        values=values,
        mean=weighted_mean(values, samples),
        centered=False,
        model=model.name,
        param_names=tuple(model.param_names),
    )


def center(e: Ensemble) -> Ensemble:
    """Subtract the stored mean from every column.

    Raises:
        EnsembleError: If the ensemble is already centered
    """
    if e.centered:
        raise EnsembleError("ensemble is already centered")
    return replace(e, values=e.values - e.mean[:, None], centered=True)


def pointwise_variance(e: Ensemble) -> np.ndarray:
    """Variance D(t_m) at every node, with the same divisor as ``sample_covariance``."""
    fc = e.values if e.centered else e.values - e.mean[:, None]
    if e.samples.is_quadrature:
        return (fc**2) @ e.samples.averaging_weights()
    if e.N < 2:
        raise EnsembleError("Monte Carlo variance needs N >= 2")
    return np.sum(fc**2, axis=1) / (e.N - 1)


def subsample(e: Ensemble, n: int) -> Ensemble:
    """Uncentered ensemble of the first ``n`` Monte Carlo samples, mean recomputed."""
    if not 1 <= n <= e.N:
        raise EnsembleError(f"cannot take {n} of {e.N} samples")
    samples = e.samples.subset(np.arange(n))
    values = e.raw_values()[:, :n].copy()
    return replace(e, samples=samples, values=values, mean=weighted_mean(values, samples), centered=False)


def restrict(e: Ensemble, time_rule: TimeRule) -> Ensemble:
    """Ensemble on a leading sub-grid of its time rule (growing windows)."""
    if time_rule is e.time_rule:
        return e
    m = time_rule.size
    if m > e.n_quad or not np.array_equal(time_rule.nodes, e.time_rule.nodes[:m]):
        raise EnsembleError("restricted time rule must be a leading sub-grid of the ensemble grid")
    return replace(e, time_rule=time_rule, values=e.values[:m].copy(), mean=e.mean[:m].copy())

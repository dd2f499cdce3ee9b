"""Error of fixing unimportant parameters at nominal values.

For a kept subset U, the reduced model is f(t, xi_U, xi̅_{U^c}). The
relative error of one nominal is the time-integrated half mean squared
difference to the full model over the time-integrated variance; its mean
over random nominals is the generalized total index of U^c, and Markov's
inequality bounds how often it exceeds S_tot / eps.
"""

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.stats import qmc

from ensemble import evaluate_batch, make_rng
from errors import ConfigError, DegenerateVarianceError
from quadrature import TimeRule
from sobol.montecarlo import generalized_mc
from sobol.reports import FixingReport
from sobol.subsets import SubsetU

logger = logging.getLogger(__name__)

MARKOV_LEVELS = (0.1, 0.25, 0.5)
DESIGNS = ("lhs", "random")


def nominal_design(n_fixed: int, M: int, seed: int, design: str = "lhs") -> np.ndarray:
    """M nominal vectors in [-1, 1]^n_fixed, Latin hypercube or i.i.d. uniform."""
    if M < 1:
        raise ConfigError([f"fix.M: must be >= 1, got {M}"])
    if design not in DESIGNS:
        raise ConfigError([f"fix.design: must be one of {DESIGNS}, got '{design}'"])
    if n_fixed == 0:
        return np.zeros((M, 0))
    if design == "lhs":
        unit = qmc.LatinHypercube(d=n_fixed, seed=make_rng(seed)).random(M)
        return 2.0 * unit - 1.0
    return make_rng(seed).uniform(-1.0, 1.0, size=(M, n_fixed))


def _reduced(X: np.ndarray, U: SubsetU, nominal: np.ndarray) -> np.ndarray:
    Xr = X.copy()
    fixed = [i - 1 for i in U.complement_members]
    if fixed:
        Xr[:, fixed] = nominal
    return Xr


def markov_table(errors: np.ndarray, reference: float, levels: Sequence[float] = MARKOV_LEVELS) -> pd.DataFrame:
    """Empirical P(error >= S_tot / eps) against the Markov bound eps."""
    rows = []
    for eps in levels:
        threshold = reference / eps
        rate = float(np.mean(errors >= threshold)) if reference > 0 else float(np.mean(errors > 0))
        rows.append({"eps": eps, "threshold": threshold, "violation_rate": rate, "within_bound": rate <= eps})
    return pd.DataFrame(rows, columns=["eps", "threshold", "violation_rate", "within_bound"])


def fixing_error(
    model,
    U: SubsetU,
    time_rule: TimeRule,
    seed: int,
    N: int = 2000,
    nominal_samples: Optional[np.ndarray] = None,
    M: int = 200,
    design: str = "lhs",
    reference: Optional[float] = None,
    reference_N: int = 20000,
    param_names: Sequence[str] = ()
) -> FixingReport:
    """Relative fixing error for M nominal values of U^c.

    Args:
        model: Full process
        U: Variables kept random
        time_rule: Time quadrature of the integrals
        seed: Seed of the evaluation sample, the nominal design and the reference
        N: Evaluation samples per nominal
        nominal_samples: Explicit nominals, shape (M, |U^c|); drawn from ``design`` when None
        reference: Known S_tot of U^c; estimated by pick-freeze with ``reference_N`` when None

    Raises:
        DegenerateVarianceError: If the integrated variance of the full model is zero
    """
    names = list(param_names) or [f"xi{i}" for i in range(1, model.dim + 1)]
    fixed_labels = [names[i - 1] for i in U.complement_members]
    if nominal_samples is None:
        nominals = nominal_design(len(fixed_labels), M, seed + 2, design)
    else:
        nominals = np.atleast_2d(np.asarray(nominal_samples, dtype=float)).reshape(-1, len(fixed_labels))

    t, w = time_rule.nodes, time_rule.weights
    X = make_rng(seed).uniform(-1.0, 1.0, size=(N, model.dim))
    f_full = evaluate_batch(model, X, t)
    denominator = float(w @ f_full.var(axis=0, ddof=1))
    if denominator <= 0:
        raise DegenerateVarianceError("full model has zero integrated variance", where="fixing")

    errors = np.empty(len(nominals))
    for j, nominal in enumerate(nominals):
        f_reduced = evaluate_batch(model, _reduced(X, U, nominal), t)
        eps_t = 0.5 * np.mean((f_full - f_reduced) ** 2, axis=0)
        errors[j] = float(w @ eps_t) / denominator

    if reference is None:
        if U.is_full:
            reference = 0.0
        else:
            reference = generalized_mc(model, U.complement(), reference_N, time_rule, seed + 3, n_boot=0).S_tot

    mean_error = float(errors.mean())
    logger.info(
        f"Fixing {fixed_labels or 'nothing'}: mean relative error {mean_error:.4f} "
        f"over {len(errors)} nominals, reference S_tot={reference:.4f}"
    )
    return FixingReport(
        kept=U,
        fixed_labels=fixed_labels,
        nominals=nominals,
        errors=errors,
        mean_error=mean_error,
        reference_S_tot=float(reference),
        markov=markov_table(errors, float(reference)),
    )


def _full_and_reduced(
    model,
    U: SubsetU,
    nominal: Optional[np.ndarray],
    N: int,
    time_rule: TimeRule,
    seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    if nominal is None:
        nominal = np.zeros(len(U.complement_members))
    X = make_rng(seed).uniform(-1.0, 1.0, size=(N, model.dim))
    f_full = evaluate_batch(model, X, time_rule.nodes)
    if U.is_full:
        return f_full, f_full
    return f_full, evaluate_batch(model, _reduced(X, U, np.asarray(nominal, dtype=float)), time_rule.nodes)


def reduced_model_bands(
    model,
    U: SubsetU,
    time_rule: TimeRule,
    seed: int,
    N: int = 2000,
    nominal: Optional[np.ndarray] = None,
    percentiles: Tuple[float, float] = (2.0, 98.0)
) -> pd.DataFrame:
    """Percentile envelopes of the full and the reduced model on the grid.

    The default nominal is xi̅ = 0, i.e. the nominal parameter values.
    """
    f_full, f_reduced = _full_and_reduced(model, U, nominal, N, time_rule, seed)
    lo, hi = percentiles
    return pd.DataFrame({
        "t": time_rule.nodes,
        "full_lo": np.percentile(f_full, lo, axis=0),
        "full_hi": np.percentile(f_full, hi, axis=0),
        "reduced_lo": np.percentile(f_reduced, lo, axis=0),
        "reduced_hi": np.percentile(f_reduced, hi, axis=0),
    })


def reduced_model_variance(
    model,
    U: SubsetU,
    time_rule: TimeRule,
    seed: int,
    N: int = 2000,
    nominal: Optional[np.ndarray] = None
) -> pd.DataFrame:
    """Pointwise variance of the full and the reduced model."""
    f_full, f_reduced = _full_and_reduced(model, U, nominal, N, time_rule, seed)
    return pd.DataFrame({
        "t": time_rule.nodes,
        "D_full": f_full.var(axis=0, ddof=1),
        "D_reduced": f_reduced.var(axis=0, ddof=1),
    })


def band_coverage(bands: pd.DataFrame, dilation: float = 0.1) -> np.ndarray:
    """Per node: reduced band inside the full band widened by ``dilation`` x its width."""
    width = bands["full_hi"] - bands["full_lo"]
    lo = bands["full_lo"] - dilation * width
    hi = bands["full_hi"] + dilation * width
    return ((bands["reduced_lo"] >= lo) & (bands["reduced_hi"] <= hi)).to_numpy()

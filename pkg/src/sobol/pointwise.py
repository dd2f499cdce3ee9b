"""Pointwise-in-time indices from per-node PC expansions and their time integrals."""

import logging
from typing import Optional, Sequence, Union

import numpy as np

from config import Config
from errors import DegenerateVarianceError, EnsembleError
from pce import PCExpansion, pce_variance_split, support_masks
from quadrature import TimeRule
from sobol.reports import PointwiseIndices, SobolEntry, SobolReport
from sobol.subsets import SubsetU

config = Config()
logger = logging.getLogger(__name__)


def pointwise_indices_from_pce(
    expansion: PCExpansion,
    U: SubsetU,
    t: Optional[np.ndarray] = None,
    param_names: Sequence[str] = ()
) -> PointwiseIndices:
    """S^U(t_m) and S_tot^U(t_m) at every node of a stacked (N_quad, P) expansion.

    Raises:
        DegenerateVarianceError: If the variance vanishes at every node
    """
    if not expansion.stacked:
        raise EnsembleError("pointwise indices need one coefficient row per time node")
    first, total, D = pce_variance_split(expansion, U)
    defined = D > config.DEGENERATE_RTOL * D.max()
    safe = np.where(defined, D, 1.0)
    t = np.arange(len(D), dtype=float) if t is None else np.asarray(t, dtype=float)
    return PointwiseIndices(
        t=t,
        D=D,
        D_first=first,
        D_tot=total,
        S_first=np.where(defined, first / safe, np.nan),
        S_tot=np.where(defined, total / safe, np.nan),
        defined=defined,
        label=U.label(param_names),
    )


def generalized_from_pointwise(
    source: Union[PointwiseIndices, PCExpansion],
    time_rule: TimeRule,
    U: SubsetU,
    param_names: Sequence[str] = ()
) -> SobolEntry:
    """Time-integrated indices sum_m w_m D^U(t_m) / sum_m w_m D(t_m).

    On a PC expansion the per-term energies ``||Psi_k||^2 sum_m w_m c_k(t_m)^2``
    are integrated first and then summed over the index sets.

    Raises:
        DegenerateVarianceError: If the integrated variance is zero
    """
    w = time_rule.weights
    if isinstance(source, PCExpansion):
        coeffs = np.atleast_2d(source.coeffs)
        if coeffs.shape[0] != time_rule.size:
            raise EnsembleError(f"{coeffs.shape[0]} coefficient rows for {time_rule.size} time nodes")
        energy = (w @ coeffs ** 2) * source.basis.norms
        first_mask, total_mask = support_masks(source.basis, U)
        denominator = float(np.sum(energy[1:]))
        first, total = float(np.sum(energy[first_mask])), float(np.sum(energy[total_mask]))
    else:
        if len(source.D) != time_rule.size:
            raise EnsembleError(f"{len(source.D)} pointwise values for {time_rule.size} time nodes")
        denominator = float(w @ source.D)
        first, total = float(w @ source.D_first), float(w @ source.D_tot)

    if denominator <= 0:
        raise DegenerateVarianceError("time-integrated variance is zero", where=U.label(param_names))
    return SobolEntry(target=U, label=U.label(param_names), S_first=first / denominator, S_tot=total / denominator)


def pointwise_report(
    expansion: PCExpansion,
    time_rule: TimeRule,
    subsets: Sequence[SubsetU],
    method: str,
    param_names: Sequence[str] = (),
    seed: Optional[int] = None
) -> SobolReport:
    """Generalized indices of several subsets from one per-node expansion."""
    entries = [generalized_from_pointwise(expansion, time_rule, U, param_names) for U in subsets]
    report = SobolReport(
        entries=entries,
        method=method,
        T=time_rule.T,
        seed=seed,
        diagnostics={"N_ord": expansion.basis.order, "P": expansion.basis.size, "N_quad": time_rule.size},
    )
    report.check()
    return report

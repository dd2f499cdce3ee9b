"""Generalized indices from surrogates of the KL modes.

The first-order index of U is the PC first-order variance of every mode
surrogate, summed and divided by the retained eigenvalue sum; totals use
the complement identity S_tot^U = 1 - S^{U^c}.
"""

from typing import Optional, Sequence

import numpy as np

from errors import DegenerateVarianceError, EnsembleError
from pce import PCExpansion, support_masks
from sobol.reports import SobolEntry, SobolReport
from sobol.subsets import SubsetU


def _first_order_sum(modes: PCExpansion, members) -> float:
    first_mask, _ = support_masks(modes.basis, members)
    energy = np.atleast_2d(modes.coeffs) ** 2 * modes.basis.norms
    return float(np.sum(energy[:, first_mask]))


def generalized_spectral(
    mode_surrogates: PCExpansion,
    lambdas: np.ndarray,
    U: SubsetU,
    param_names: Sequence[str] = ()
) -> SobolEntry:
    """Spectral first-order and total generalized indices of U.

    Args:
        mode_surrogates: Stacked expansions of the Nkl retained modes
        lambdas: Eigenvalues; the first Nkl are used as the denominator
        U: Target subset

    Raises:
        DegenerateVarianceError: If the retained eigenvalues sum to zero
    """
    nkl = np.atleast_2d(mode_surrogates.coeffs).shape[0]
    if nkl < 1 or len(lambdas) < nkl:
        raise EnsembleError(f"{nkl} mode surrogates but {len(lambdas)} eigenvalues")
    denominator = float(np.sum(lambdas[:nkl]))
    if denominator <= 0:
        raise DegenerateVarianceError("retained eigenvalues sum to zero", where=U.label(param_names))

    first = _first_order_sum(mode_surrogates, U.members) / denominator
    if U.is_full:
        total = 1.0
    else:
        total = 1.0 - _first_order_sum(mode_surrogates, U.complement_members) / denominator
    return SobolEntry(target=U, label=U.label(param_names), S_first=first, S_tot=total)


def spectral_report(
    mode_surrogates: PCExpansion,
    lambdas: np.ndarray,
    subsets: Sequence[SubsetU],
    method: str,
    T: float,
    param_names: Sequence[str] = (),
    seed: Optional[int] = None
) -> SobolReport:
    nkl = np.atleast_2d(mode_surrogates.coeffs).shape[0]
    report = SobolReport(
        entries=[generalized_spectral(mode_surrogates, lambdas, U, param_names) for U in subsets],
        method=method,
        T=T,
        seed=seed,
        diagnostics={"Nkl": nkl, "N_ord": mode_surrogates.basis.order, "P": mode_surrogates.basis.size},
    )
    report.check()
    return report

"""Variance bookkeeping on a PC basis: index sets and partial variances.

Variables are numbered from 1, so ``U = (1, 3)`` means {xi_1, xi_3}.
"""

from typing import Iterable, List, Tuple

import numpy as np

from errors import BasisError, DegenerateVarianceError
from pce.basis import PCBasis
from pce.fit import PCExpansion


def _check_variable(basis: PCBasis, i: int) -> None:
    if not 1 <= i <= basis.dim:
        raise BasisError(f"variable index {i} outside 1..{basis.dim}")


def index_set_Ki(basis: PCBasis, i: int) -> List[int]:
    """Terms k >= 1 in which variable i appears."""
    _check_variable(basis, i)
    return np.flatnonzero(basis.indices[:, i - 1] > 0).tolist()


def index_set_Ij(basis: PCBasis, i: int) -> List[int]:
    """Terms k >= 1 that involve variable i and no other variable."""
    _check_variable(basis, i)
    alone = basis.indices[:, i - 1] > 0
    others = np.delete(basis.indices, i - 1, axis=1)
    return np.flatnonzero(alone & np.all(others == 0, axis=1)).tolist()


def support_masks(basis: PCBasis, U: Iterable[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Boolean masks over terms: support inside U (first order), support meeting U (total)."""
    members = sorted(set(int(i) for i in U))
    if not members:
        raise BasisError("variable subset must be non-empty")
    for i in members:
        _check_variable(basis, i)
    in_u = np.zeros(basis.dim, dtype=bool)
    in_u[[i - 1 for i in members]] = True

    active = basis.indices > 0
    nonconstant = active.any(axis=1)
    first = nonconstant & ~np.any(active[:, ~in_u], axis=1)
    total = np.any(active[:, in_u], axis=1)
    return first, total


def pce_variance_split(expansion: PCExpansion, U: Iterable[int]):
    """First-order variance of U, total variance of U, and total variance.

    For stacked expansions each returned value is an array over rows.

    Raises:
        DegenerateVarianceError: If the total variance vanishes (every row, when stacked)
    """
    first_mask, total_mask = support_masks(expansion.basis, U)
    energy = expansion.coeffs ** 2 * expansion.basis.norms
    first = np.sum(energy[..., first_mask], axis=-1)
    total = np.sum(energy[..., total_mask], axis=-1)
    variance = expansion.variance()
    if np.all(variance == 0):
        raise DegenerateVarianceError("expansion has zero variance; Sobol' indices are undefined")
    return first, total, variance

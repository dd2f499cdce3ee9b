"""Total-degree multivariate Legendre bases.

Norms are taken under the normalized uniform measure on [-1, 1]^Np, so
``||Psi_k||^2 = prod_i 1 / (2 alpha_i + 1)``.
"""

from dataclasses import dataclass, field
from math import comb
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import legendre

from config import Config
from errors import BasisError

config = Config()


def _compositions(total: int, dim: int) -> Iterator[Tuple[int, ...]]:
    # First variable carries the highest power first
    if dim == 1:
        yield (total,)
        return
    for head in range(total, -1, -1):
        for tail in _compositions(total - head, dim - 1):
            yield (head,) + tail


@dataclass(frozen=True, eq=False)
class PCBasis:
    """Ordered multi-index set with precomputed norms.

    Attributes:
        dim: Number of variables Np
        order: Total-degree truncation N_ord
        indices: Integer array of shape (P, Np); row 0 is the zero index
        norms: ``||Psi_k||^2`` for every row
    """
    dim: int
    order: int
    indices: np.ndarray
    norms: np.ndarray = field(init=False)

    def __post_init__(self):
        if self.indices.ndim != 2 or self.indices.shape[1] != self.dim:
            raise BasisError(f"indices must have shape (P, {self.dim})")
        if np.any(self.indices[0] != 0):
            raise BasisError("the first multi-index must be zero")
        object.__setattr__(self, "norms", np.prod(1.0 / (2.0 * self.indices + 1.0), axis=1))

    @property
    def size(self) -> int:
        return len(self.indices)

    @property
    def degrees(self) -> np.ndarray:
        return self.indices.sum(axis=1)

    def evaluate(self, xis: np.ndarray) -> np.ndarray:
        """Measurement matrix Lambda[j, k] = Psi_k(xi^(j)), shape (N, P)."""
        xis = np.atleast_2d(np.asarray(xis, dtype=float))
        if xis.shape[1] != self.dim:
            raise BasisError(f"basis has {self.dim} variables, points have {xis.shape[1]}")
        max_deg = int(self.indices.max()) if self.size else 0
        out = np.ones((len(xis), self.size))
        for i in range(self.dim):
            vander = legendre.legvander(xis[:, i], max_deg)
            out *= vander[:, self.indices[:, i]]
        return out


def basis_size(Np: int, N_ord: int) -> int:
    """(N_ord + Np)! / (N_ord! Np!)."""
    return comb(N_ord + Np, Np)


def total_degree_basis(Np: int, N_ord: int, cap: Optional[int] = None) -> PCBasis:
    """All multi-indices of total degree <= N_ord in graded order.

    Within one total degree, indices are ordered with the first variable's
    power descending, so for Np=2, N_ord=1 the basis is {1, P1(xi1), P1(xi2)}.

    Raises:
        BasisError: If Np < 1, N_ord < 0, or the size exceeds the cap

    Example:
        >>> total_degree_basis(3, 4).size
        35
    """
    if Np < 1 or N_ord < 0:
        raise BasisError(f"need Np >= 1 and N_ord >= 0, got Np={Np}, N_ord={N_ord}")
    cap = config.BASIS_CAP if cap is None else cap
    count = basis_size(Np, N_ord)
    if count > cap:
        raise BasisError(f"basis with Np={Np}, N_ord={N_ord} has {count} terms, above the cap of {cap}")

    rows = [alpha for total in range(N_ord + 1) for alpha in _compositions(total, Np)]
    return PCBasis(dim=Np, order=N_ord, indices=np.array(rows, dtype=int))


def basis_from_indices(indices: Sequence[Sequence[int]]) -> PCBasis:
    """Rebuild a basis from a stored index list."""
    arr = np.asarray(indices, dtype=int)
    if arr.ndim != 2 or len(arr) == 0:
        raise BasisError("stored index list must be a non-empty 2D array")
    return PCBasis(dim=arr.shape[1], order=int(arr.sum(axis=1).max()), indices=arr)


def legendre_eval(order: int, x):
    """Legendre polynomial P_order evaluated at ``x``."""
    coeffs = np.zeros(order + 1)
    coeffs[order] = 1.0
    return legendre.legval(x, coeffs)


def psi_eval(alpha: Sequence[int], xi) -> float:
    """Psi_alpha(xi) = prod_i P_{alpha_i}(xi_i)."""
    return float(np.prod([legendre_eval(int(a), x) for a, x in zip(alpha, xi)]))

"""User-supplied simulations ingested from an ensemble table."""

from typing import Sequence, Tuple

import numpy as np

from errors import ModelError


class ExternalTableModel:
    """Black-box process backed by a precomputed table.

    The table can only be "evaluated" at the parameter vectors and time grid
    it was recorded on; anything else is a ModelError.

    Args:
        name: Model identifier from the table header
        param_names: Names of the Np parameters
        t: Time grid of the table
        draws: Parameter vectors, shape (N, Np)
        values: Process values, shape (len(t), N)
    """

    vectorized = False

    def __init__(
        self,
        name: str,
        param_names: Sequence[str],
        t: np.ndarray,
        draws: np.ndarray,
        values: np.ndarray
    ):
        t = np.asarray(t, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise ModelError("external table time grid is not increasing")
        if values.shape != (t.size, draws.shape[0]):
            raise ModelError(
                f"external table has values {values.shape}, expected {(t.size, draws.shape[0])}"
            )
        self.name = name
        self.param_names: Tuple[str, ...] = tuple(param_names)
        self.t = t
        self.draws = np.asarray(draws, dtype=float)
        self.values = np.asarray(values, dtype=float)

    @property
    def dim(self) -> int:
        return len(self.param_names)

    def evaluate(self, xi, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if t.shape != self.t.shape or not np.allclose(t, self.t, rtol=0, atol=1e-12):
            raise ModelError(f"external table '{self.name}' is only defined on its own time grid")
        hits = np.flatnonzero(np.all(np.abs(self.draws - np.asarray(xi)) <= 1e-12, axis=1))
        if hits.size == 0:
            raise ModelError(f"external table '{self.name}' has no record for xi={list(xi)}")
        return self.values[:, hits[0]].copy()

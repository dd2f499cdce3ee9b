"""Underdamped oscillator y'' + 2a y' + (a^2 + b^2) y = 0, y(0) = l, y'(0) = 0."""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from errors import ModelError

# Uncertain ranges: alpha ~ U(3/8, 5/8), beta ~ U(10/4, 15/4), ell ~ U(-5/4, -3/4)
NOMINAL = {"alpha": 0.5, "beta": 25.0 / 8.0, "ell": -1.0}
HALF_WIDTH = {"alpha": 0.125, "beta": 5.0 / 8.0, "ell": 0.25}


@dataclass(frozen=True)
class OscillatorParams:
    alpha: float
    beta: float
    ell: float


def oscillator_eval(t, p: OscillatorParams):
    """Closed-form displacement ``l e^{-a t} (cos b t + (a/b) sin b t)``.

    Raises:
        ModelError: If ``p.beta`` is zero
    """
    if p.beta == 0:
        raise ModelError("oscillator frequency beta must be nonzero")
    t = np.asarray(t, dtype=float)
    return p.ell * np.exp(-p.alpha * t) * (
        np.cos(p.beta * t) + (p.alpha / p.beta) * np.sin(p.beta * t)
    )


def oscillator_param_map(xi) -> OscillatorParams:
    """Map ``xi`` in [-1, 1]^3 to physical parameters."""
    xi = np.asarray(xi, dtype=float)
    return OscillatorParams(
        alpha=NOMINAL["alpha"] + HALF_WIDTH["alpha"] * xi[0],
        beta=NOMINAL["beta"] + HALF_WIDTH["beta"] * xi[1],
        ell=NOMINAL["ell"] + HALF_WIDTH["ell"] * xi[2],
    )


class OscillatorModel:
    """Process f(t, xi) = y(t; alpha(xi), beta(xi), ell(xi))."""

    name = "oscillator"
    param_names: Tuple[str, ...] = ("alpha", "beta", "ell")
    vectorized = True

    @property
    def dim(self) -> int:
        return len(self.param_names)

    def evaluate(self, xi, t) -> np.ndarray:
        return oscillator_eval(t, oscillator_param_map(xi))

    def evaluate_many(self, xis: np.ndarray, t: np.ndarray) -> np.ndarray:
        """Evaluate a batch of parameter vectors; returns shape (N, len(t))."""
        xis = np.atleast_2d(np.asarray(xis, dtype=float))
        alpha = (NOMINAL["alpha"] + HALF_WIDTH["alpha"] * xis[:, 0])[:, None]
        beta = (NOMINAL["beta"] + HALF_WIDTH["beta"] * xis[:, 1])[:, None]
        ell = (NOMINAL["ell"] + HALF_WIDTH["ell"] * xis[:, 2])[:, None]
        t = np.asarray(t, dtype=float)[None, :]
        return ell * np.exp(-alpha * t) * (np.cos(beta * t) + (alpha / beta) * np.sin(beta * t))

"""Compartmental cholera model with highly- and lowly-infectious bacteria.

States are (S, I, R, B_H, B_L); the quantity of interest is I(t).
"""

from dataclasses import dataclass, replace
from typing import Callable, Tuple

import numpy as np

from errors import ModelError
from models.integrator import OdeConfig, integrate_ode

N_POP = 10000.0
HORIZON = 250.0
PERTURBATION = 0.1
KAPPA_RATIO = 700.0

PARAM_NAMES: Tuple[str, ...] = (
    "beta_L", "beta_H", "kappa_L", "b", "chi", "zeta", "delta", "gamma"
)


@dataclass(frozen=True)
class CholeraParams:
    """Rates in 1/week, capacities in bacteria/ml, shedding in bacteria/(individual ml week)."""
    beta_L: float
    beta_H: float
    kappa_L: float
    kappa_H: float
    b: float
    chi: float
    zeta: float
    delta: float
    gamma: float

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if not value > 0:
                raise ModelError(f"cholera parameter {name} must be positive, got {value}")


NOMINAL = CholeraParams(
    beta_L=1.5,
    beta_H=7.5,
    kappa_L=1e6,
    kappa_H=1e6 / KAPPA_RATIO,
    b=1.0 / 1560.0,
    chi=168.0 / 5.0,
    zeta=70.0,
    delta=7.0 / 30.0,
    gamma=7.0 / 5.0,
)


@dataclass(frozen=True)
class CholeraState:
    S: float
    I: float
    R: float
    B_H: float
    B_L: float

    def as_array(self) -> np.ndarray:
        return np.array([self.S, self.I, self.R, self.B_H, self.B_L])


INITIAL_STATE = CholeraState(S=N_POP - 1.0, I=1.0, R=0.0, B_H=0.0, B_L=0.0)


def cholera_param_map(xi) -> CholeraParams:
    """Apply a 10% uniform perturbation ``x_i = x̄_i (1 + 0.1 xi_i)`` to the 8 free parameters.

    kappa_H follows the mapped kappa_L through the fixed ratio 1/700.

    Raises:
        ModelError: If ``xi`` has the wrong length or leaves [-1, 1]
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (len(PARAM_NAMES),):
        raise ModelError(f"cholera model expects {len(PARAM_NAMES)} parameters, got shape {xi.shape}")
    if np.any(np.abs(xi) > 1.0 + 1e-12):
        raise ModelError(f"xi outside [-1, 1]: {xi.tolist()}")

    values = {
        name: getattr(NOMINAL, name) * (1.0 + PERTURBATION * x)
        for name, x in zip(PARAM_NAMES, xi)
    }
    return replace(NOMINAL, kappa_H=values["kappa_L"] / KAPPA_RATIO, **values)


def cholera_rhs(p: CholeraParams, n_pop: float = N_POP) -> Callable[[float, np.ndarray], np.ndarray]:
    """Vector field of the model for fixed parameters."""

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        S, I, R, B_H, B_L = y
        infection = p.beta_L * S * B_L / (p.kappa_L + B_L) + p.beta_H * S * B_H / (p.kappa_H + B_H)
        return np.array([
            p.b * n_pop - infection - p.b * S,
            infection - (p.gamma + p.b) * I,
            p.gamma * I - p.b * R,
            p.zeta * I - p.chi * B_H,
            p.chi * B_H - p.delta * B_L,
        ])

    return rhs


def cholera_trajectory(xi, out_grid, cfg: OdeConfig = OdeConfig()) -> np.ndarray:
    """All five compartments on the grid, shape (len(out_grid), 5)."""
    p = cholera_param_map(xi)
    return integrate_ode(cholera_rhs(p), INITIAL_STATE.as_array(), out_grid, cfg)


def cholera_infected(xi, out_grid, cfg: OdeConfig = OdeConfig()) -> np.ndarray:
    """Infected population I(t_m, xi)."""
    return cholera_trajectory(xi, out_grid, cfg)[:, 1]


class CholeraModel:
    """Process f(t, xi) = I(t, xi) for the cholera model."""

    name = "cholera"
    param_names = PARAM_NAMES
    vectorized = False

    def __init__(self, ode: OdeConfig = OdeConfig()):
        self.ode = ode

    @property
    def dim(self) -> int:
        return len(self.param_names)

    def evaluate(self, xi, t) -> np.ndarray:
        return cholera_infected(xi, t, self.ode)

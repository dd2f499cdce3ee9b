"""Adaptive Dormand-Prince 5(4) integration onto a fixed output grid."""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import RK45

from errors import ConfigError, IntegrationError


@dataclass(frozen=True)
class OdeConfig:
    """Integrator settings.

    Attributes:
        abs_tol: Absolute local error tolerance
        rel_tol: Relative local error tolerance
        max_steps: Accepted-step budget before giving up
        initial_step: First trial step (None lets the solver choose)
    """
    abs_tol: float = 1e-6
    rel_tol: float = 1e-6
    max_steps: int = 200000
    initial_step: Optional[float] = None

    def __post_init__(self):
        problems = []
        if not self.abs_tol > 0:
            problems.append(f"ode.abs_tol: must be > 0, got {self.abs_tol}")
        if not self.rel_tol > 0:
            problems.append(f"ode.rel_tol: must be > 0, got {self.rel_tol}")
        if self.max_steps < 1:
            problems.append(f"ode.max_steps: must be >= 1, got {self.max_steps}")
        if self.initial_step is not None and not self.initial_step > 0:
            problems.append(f"ode.initial_step: must be > 0, got {self.initial_step}")
        if problems:
            raise ConfigError(problems)

    def halved(self) -> "OdeConfig":
        return OdeConfig(self.abs_tol / 2, self.rel_tol / 2, self.max_steps, self.initial_step)


def integrate_ode(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    out_grid: np.ndarray,
    cfg: OdeConfig = OdeConfig()
) -> np.ndarray:
    """Integrate ``y' = rhs(t, y)`` from ``out_grid[0]`` and sample on the grid.

    Each accepted step's dense (quartic) interpolant fills every output node it
    covers, so the adaptive steps never have to land on the grid.

    Args:
        rhs: Vector field ``rhs(t, y)``
        y0: State at ``out_grid[0]``
        out_grid: Increasing output times
        cfg: Tolerances and step budget

    Returns:
        Trajectory of shape (len(out_grid), len(y0))

    Raises:
        IntegrationError: On step-size underflow or when max_steps is exceeded
    """
    grid = np.asarray(out_grid, dtype=float)
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if np.any(np.diff(grid) <= 0):
        raise IntegrationError("output grid must be strictly increasing", grid[0])
    if not np.all(np.isfinite(rhs(grid[0], y0))):
        raise IntegrationError("vector field is not finite at the initial state", grid[0])

    out = np.empty((grid.size, y0.size))
    out[0] = y0
    if grid.size == 1:
        return out

    solver = RK45(
        rhs,
        grid[0],
        y0,
        grid[-1],
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        first_step=cfg.initial_step,
    )
    filled = 1
    steps = 0
    while solver.status == "running":
        if steps >= cfg.max_steps:
            raise IntegrationError(f"exceeded max_steps={cfg.max_steps}", solver.t)
        message = solver.step()
        steps += 1
        if solver.status == "failed":
            raise IntegrationError(str(message), solver.t)
        if not np.all(np.isfinite(solver.y)):
            raise IntegrationError("solution became non-finite", solver.t_old)

        reached = np.searchsorted(grid, solver.t, side="right")
        if reached > filled:
            interpolant = solver.dense_output()
            out[filled:reached] = interpolant(grid[filled:reached]).T
            filled = reached

    return out

"""Sample sets in the parameter space Omega = [-1, 1]^Np."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from errors import EnsembleError
from quadrature import ParamRule

MONTE_CARLO = "monte-carlo"
QUADRATURE = "quadrature"


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox generator; identical streams on every platform."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Parameter draws with their averaging scheme.

    Attributes:
        dim: Number of parameters Np
        draws: Array of shape (N, Np)
        scheme: ``"monte-carlo"`` or ``"quadrature"``
        seed: RNG seed for Monte Carlo draws
        weights: Quadrature weights nu_j (quadrature scheme only)
        rule_id: Identifier of the quadrature rule
        exactness: Total degree integrated exactly by the rule
    """
    dim: int
    draws: np.ndarray
    scheme: str = MONTE_CARLO
    seed: Optional[int] = None
    weights: Optional[np.ndarray] = None
    rule_id: Optional[str] = None
    exactness: Optional[int] = None

    def __post_init__(self):
        if self.draws.ndim != 2 or self.draws.shape[1] != self.dim:
            raise EnsembleError(f"draws must have shape (N, {self.dim}), got {self.draws.shape}")
        if np.any(np.abs(self.draws) > 1.0 + 1e-12):
            raise EnsembleError("draws leave [-1, 1]^Np")
        if self.scheme == QUADRATURE:
            if self.weights is None or len(self.weights) != len(self.draws):
                raise EnsembleError("quadrature sample set needs one weight per node")
            if abs(float(np.sum(self.weights)) - 1.0) > 1e-12:
                raise EnsembleError("quadrature weights must sum to one")
        elif self.scheme != MONTE_CARLO:
            raise EnsembleError(f"unknown sampling scheme '{self.scheme}'")

    @property
    def size(self) -> int:
        return len(self.draws)

    @property
    def is_quadrature(self) -> bool:
        return self.scheme == QUADRATURE

    def averaging_weights(self) -> np.ndarray:
        """Weights of the mean: nu_j for quadrature, 1/N for Monte Carlo."""
        if self.is_quadrature:
            return np.asarray(self.weights, dtype=float)
        return np.full(self.size, 1.0 / self.size)

    def as_rule(self) -> ParamRule:
        """The quadrature rule a quadrature sample set was built from."""
        if not self.is_quadrature:
            raise EnsembleError("Monte Carlo draws are not a quadrature rule")
        return ParamRule(
            dim=self.dim,
            nodes=self.draws,
            weights=np.asarray(self.weights, dtype=float),
            exactness=self.exactness,
            rule_id=self.rule_id or "quadrature",
        )

    def subset(self, index: np.ndarray) -> "SampleSet":
        """Monte Carlo sub-sample (first-n studies of spectrum convergence)."""
        if self.is_quadrature:
            raise EnsembleError("cannot sub-sample a quadrature rule")
        return SampleSet(dim=self.dim, draws=self.draws[index], seed=self.seed)


def draw_samples(Np: int, N: int, seed: int) -> SampleSet:
    """N i.i.d. uniform draws on [-1, 1]^Np, reproducible from ``seed``."""
    if N < 1:
        raise EnsembleError(f"need at least one sample, got N={N}")
    draws = make_rng(seed).uniform(-1.0, 1.0, size=(N, Np))
    return SampleSet(dim=Np, draws=draws, scheme=MONTE_CARLO, seed=seed)


def samples_from_rule(rule: ParamRule) -> SampleSet:
    """Quadrature sample set from a parameter-space rule."""
    return SampleSet(
        dim=rule.dim,
        draws=rule.nodes,
        scheme=QUADRATURE,
        weights=rule.weights,
        rule_id=rule.rule_id,
        exactness=rule.exactness,
    )

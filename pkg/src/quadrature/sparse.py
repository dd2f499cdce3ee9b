"""Multi-dimensional rules on [-1, 1]^dim: full tensor and Smolyak sparse grids."""

import logging
from dataclasses import dataclass
from math import comb
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from config import Config
from errors import QuadratureError
from quadrature.rules import Rule1D, clenshaw_curtis

config = Config()
logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ParamRule:
    """Nodes and weights in the parameter space.

    Attributes:
        dim: Number of parameters Np
        nodes: Array of shape (J, dim)
        weights: Array of shape (J,), summing to one
        exactness: Total polynomial degree integrated exactly (None if unknown)
        rule_id: Identifier recorded in artifacts, e.g. ``"tensor-gl5-d3"``
    """
    dim: int
    nodes: np.ndarray
    weights: np.ndarray
    exactness: Optional[int]
    rule_id: str

    @property
    def size(self) -> int:
        return len(self.weights)

    def integrate(self, f) -> float:
        """Integrate a vectorized ``f`` taking an array of shape (J, dim)."""
        return float(np.dot(self.weights, f(self.nodes)))


def _check_cap(count: int, dim: int, cap: Optional[int]) -> None:
    cap = config.NODE_CAP if cap is None else cap
    if count * dim > cap:
        raise QuadratureError(
            f"rule would hold {count} nodes x {dim} dims, above the cap of {cap} entries"
        )


def tensor_rule(rule: Rule1D, dim: int, cap: Optional[int] = None) -> ParamRule:
    """Full tensor product of a 1D rule.

    Args:
        rule: One-dimensional rule
        dim: Number of dimensions, at least one
        cap: Maximum node-count x dim entries (defaults to Config.NODE_CAP)

    Returns:
        ParamRule with ``rule.size ** dim`` nodes and product weights

    Raises:
        QuadratureError: If the rule would exceed the cap
    """
    if dim < 1:
        raise QuadratureError(f"dim must be >= 1, got {dim}")
    _check_cap(rule.size ** dim, dim, cap)

    grids = np.meshgrid(*([rule.nodes] * dim), indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=1)
    wgrids = np.meshgrid(*([rule.weights] * dim), indexing="ij")
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return ParamRule(
        dim=dim,
        nodes=nodes,
        weights=weights,
        exactness=rule.exactness,
        rule_id=f"tensor-{rule.name}{rule.size}-d{dim}",
    )


def _cc_level(level: int) -> Rule1D:
    """Nested Clenshaw-Curtis rule for 1-based sparse-grid level."""
    return clenshaw_curtis(1 if level == 1 else 2 ** (level - 1) + 1)


def _levels(dim: int, total: int) -> Iterator[Tuple[int, ...]]:
    """All 1-based level multi-indices of length ``dim`` summing to ``total``."""
    if dim == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - dim + 2):
        for rest in _levels(dim - 1, total - first):
            yield (first,) + rest


def _new_points(level: int) -> int:
    return 1 if level == 1 else 2 if level == 2 else 2 ** (level - 2)


def _smolyak_size(level: int, dim: int) -> int:
    """Distinct nodes of the nested sparse grid, counted without building it."""
    return sum(
        int(np.prod([_new_points(l) for l in idx]))
        for total in range(dim, level + dim + 1)
        for idx in _levels(dim, total)
    )


def smolyak_rule(level: int, dim: int, cap: Optional[int] = None) -> ParamRule:
    """Smolyak sparse grid built from nested Clenshaw-Curtis rules.

    Uses the combination technique: the sparse rule is a signed sum of small
    tensor rules whose 1D levels sum to between ``level + 1`` and
    ``level + dim``. Coincident nodes are merged.

    Args:
        level: Sparse-grid level, 0 gives the single node at the origin
        dim: Number of dimensions
        cap: Maximum node-count x dim entries (defaults to Config.NODE_CAP)

    Returns:
        ParamRule exact for total-degree polynomials up to ``2*level + 1``

    Raises:
        QuadratureError: If the grid would exceed the cap
    """
    if level < 0:
        raise QuadratureError(f"Smolyak level must be >= 0, got {level}")
    if dim < 1:
        raise QuadratureError(f"dim must be >= 1, got {dim}")
    _check_cap(_smolyak_size(level, dim), dim, cap)

    rules = {l: _cc_level(l) for l in range(1, level + 2)}
    merged: Dict[Tuple[float, ...], list] = {}
    for total in range(max(level + 1, dim), level + dim + 1):
        coeff = (-1) ** (level + dim - total) * comb(dim - 1, level + dim - total)
        if coeff == 0:
            continue
        for idx in _levels(dim, total):
            parts = [rules[l] for l in idx]
            grids = np.meshgrid(*[p.nodes for p in parts], indexing="ij")
            wgrids = np.meshgrid(*[p.weights for p in parts], indexing="ij")
            pts = np.stack([g.ravel() for g in grids], axis=1)
            wts = coeff * np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
            for x, w in zip(pts, wts):
                key = tuple(np.round(x, 12) + 0.0)
                if key in merged:
                    merged[key][1] += w
                else:
                    merged[key] = [x, w]

    nodes = np.array([v[0] for v in merged.values()])
    weights = np.array([v[1] for v in merged.values()])
    keep = np.abs(weights) > 1e-15
    nodes, weights = nodes[keep], weights[keep]
    logger.info(f"Smolyak level {level} in {dim} dims: {len(weights)} nodes")
    return ParamRule(
        dim=dim,
        nodes=nodes,
        weights=weights,
        exactness=2 * level + 1,
        rule_id=f"smolyak-cc{level}-d{dim}",
    )

"""One-dimensional quadrature rules and the time-axis rule.

All parameter-space rules integrate against the normalized uniform measure
on [-1, 1] (weights sum to one), so a rule applied to ``f`` returns the
expectation of ``f(xi)`` for ``xi ~ U(-1, 1)``.
"""

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from errors import QuadratureError


@dataclass(frozen=True, eq=False)
class Rule1D:
    """Nodes and normalized weights on [-1, 1].

    Attributes:
        nodes: Strictly increasing nodes
        weights: Nonnegative weights summing to one
        exactness: Highest polynomial degree integrated exactly
        name: Rule family, used in rule identifiers
    """
    nodes: np.ndarray
    weights: np.ndarray
    exactness: int
    name: str

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


@dataclass(frozen=True, eq=False)
class TimeRule:
    """Quadrature nodes and weights on the time interval [t_1, T].

    Attributes:
        nodes: Increasing time nodes t_m
        weights: Quadrature weights w_m
    """
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def T(self) -> float:
        return float(self.nodes[-1])

    @property
    def size(self) -> int:
        return len(self.nodes)

    def integrate(self, values: np.ndarray) -> np.ndarray:
        """Integrate values sampled on the nodes (time along the first axis)."""
        return np.tensordot(self.weights, np.asarray(values, dtype=float), axes=(0, 0))

    def index_of(self, t: float) -> int:
        """Index of the node equal to ``t``.

        Raises:
            QuadratureError: If ``t`` is not a grid node
        """
        tol = 1e-9 * max(abs(self.T), 1.0)
        m = int(np.argmin(np.abs(self.nodes - t)))
        if abs(self.nodes[m] - t) > tol:
            raise QuadratureError(f"t={t} is not a node of the time grid")
        return m

    def restrict(self, tau: float) -> "TimeRule":
        """Composite trapezoid rule on the sub-grid [t_1, tau].

        Returns the rule itself when ``tau`` is the final node.
        """
        m = self.index_of(tau)
        if m == self.size - 1:
            return self
        if m < 1:
            raise QuadratureError(f"horizon tau={tau} leaves fewer than two nodes")
        return trapezoid_rule(self.nodes[:m + 1])


def gauss_legendre(n: int) -> Rule1D:
    """Gauss-Legendre rule with ``n`` nodes for the normalized uniform measure.

    Args:
        n: Number of nodes, at least one

    Returns:
        Rule exact for polynomials up to degree 2n - 1

    Example:
        >>> gauss_legendre(2).nodes
        array([-0.57735027,  0.57735027])
    """
    if n < 1:
        raise QuadratureError(f"Gauss-Legendre rule needs n >= 1, got {n}")
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return Rule1D(nodes=nodes, weights=weights / 2.0, exactness=2 * n - 1, name="gl")


def clenshaw_curtis(n: int) -> Rule1D:
    """Clenshaw-Curtis rule with ``n`` nodes (extrema of Chebyshev polynomials).

    The rule with ``2**k + 1`` nodes contains all nodes of the rule with
    ``2**(k-1) + 1`` nodes, which is what the sparse-grid construction needs.
    """
    if n < 1:
        raise QuadratureError(f"Clenshaw-Curtis rule needs n >= 1, got {n}")
    if n == 1:
        return Rule1D(nodes=np.zeros(1), weights=np.ones(1), exactness=1, name="cc")

    N = n - 1
    theta = np.pi * np.arange(n) / N
    weights = np.zeros(n)
    interior = np.ones(N - 1)
    th = theta[1:N]
    if N % 2 == 0:
        weights[0] = weights[N] = 1.0 / (N**2 - 1)
        for k in range(1, N // 2):
            interior -= 2.0 * np.cos(2 * k * th) / (4 * k**2 - 1)
        interior -= np.cos(N * th) / (N**2 - 1)
    else:
        weights[0] = weights[N] = 1.0 / N**2
        for k in range(1, (N - 1) // 2 + 1):
            interior -= 2.0 * np.cos(2 * k * th) / (4 * k**2 - 1)
    weights[1:N] = 2.0 * interior / N

    # cos(theta) runs from 1 down to -1; the weights are symmetric
    nodes = -np.cos(theta)
    nodes[np.abs(nodes) < 1e-15] = 0.0
    exactness = n if n % 2 == 1 else n - 1
    return Rule1D(nodes=nodes, weights=weights / 2.0, exactness=exactness, name="cc")


def trapezoid_rule(t_grid: Sequence[float]) -> TimeRule:
    """Composite trapezoid rule on an increasing time grid.

    Args:
        t_grid: At least two strictly increasing nodes

    Returns:
        TimeRule exact for piecewise-linear integrands on the grid

    Example:
        >>> trapezoid_rule([0.0, 1.0]).weights
        array([0.5, 0.5])
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise QuadratureError("trapezoid rule needs at least two nodes")
    if not np.all(np.isfinite(t)):
        raise QuadratureError("time grid contains non-finite values")
    h = np.diff(t)
    if np.any(h <= 0):
        raise QuadratureError("time grid must be strictly increasing")

    weights = np.zeros_like(t)
    weights[:-1] += h / 2.0
    weights[1:] += h / 2.0
    return TimeRule(nodes=t, weights=weights)


def uniform_time_rule(T: float, dt: float, t0: float = 0.0) -> TimeRule:
    """Trapezoid rule on ``t_i = t0 + i*dt`` up to ``T``.

    Raises:
        QuadratureError: If ``(T - t0) / dt`` is not (close to) an integer
    """
    if dt <= 0 or T <= t0:
        raise QuadratureError(f"invalid horizon T={T} or step dt={dt}")
    steps = (T - t0) / dt
    n = int(round(steps))
    if abs(steps - n) > 1e-8 * max(steps, 1.0):
        raise QuadratureError(f"dt={dt} does not divide the horizon {T - t0}")
    return trapezoid_rule(np.linspace(t0, T, n + 1))


def rule_1d(family: str, n: int) -> Rule1D:
    """Look up a 1D rule by family name ('gl' or 'cc')."""
    if family == "gl":
        return gauss_legendre(n)
    if family == "cc":
        return clenshaw_curtis(n)
    raise QuadratureError(f"unknown 1D rule family '{family}'")

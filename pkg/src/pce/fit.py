"""Polynomial chaos coefficients by spectral projection or l1-constrained regression."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple, Union

import numpy as np

from config import Config
from errors import BasisError, ConfigError
from pce.basis import PCBasis
from quadrature import ParamRule

config = Config()
logger = logging.getLogger(__name__)

CALIBRATIONS = ("per-step", "once")
MAX_BACKTRACKS = 40


@dataclass(eq=False)
class PCExpansion:
    """Legendre chaos expansion, possibly one coefficient row per time node or mode.

    Attributes:
        basis: Shared basis
        coeffs: Shape (P,) for a scalar quantity or (M, P) for M quantities
        info: Fit diagnostics (method, tau, residuals, convergence)
    """
    basis: PCBasis
    coeffs: np.ndarray
    info: Dict = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape[-1] != self.basis.size:
            raise BasisError(
                f"coefficient length {self.coeffs.shape[-1]} does not match basis size {self.basis.size}"
            )
        if not np.all(np.isfinite(self.coeffs)):
            raise BasisError("expansion has non-finite coefficients")

    @property
    def stacked(self) -> bool:
        return self.coeffs.ndim == 2

    def evaluate(self, xis: np.ndarray) -> np.ndarray:
        """Values at points ``xis`` (N, Np): shape (N,) or (M, N)."""
        return self.coeffs @ self.basis.evaluate(xis).T

    def mean(self):
        return self.coeffs[..., 0]

    def variance(self):
        """Sum_{k>=1} c_k^2 ||Psi_k||^2."""
        return np.sum(self.coeffs[..., 1:] ** 2 * self.basis.norms[1:], axis=-1)

    def row(self, m: int) -> "PCExpansion":
        return PCExpansion(basis=self.basis, coeffs=self.coeffs[m], info=dict(self.info))


def projection_matrix(rule: ParamRule, basis: PCBasis) -> np.ndarray:
    """Pi[l, j] = nu_j Psi_l(xi^(j)) / ||Psi_l||^2, shape (P, J)."""
    psi = basis.evaluate(rule.nodes)
    return (psi * rule.weights[:, None]).T / basis.norms[:, None]


def nisp_project(values: np.ndarray, rule: ParamRule, basis: PCBasis) -> PCExpansion:
    """Non-intrusive spectral projection of values at the rule nodes.

    Args:
        values: Shape (J,) or (M, J), the last axis running over rule nodes
        rule: Parameter-space quadrature rule
        basis: Target basis

    Returns:
        PCExpansion with coefficients ``values @ Pi.T``

    Raises:
        BasisError: On dimension mismatch
    """
    values = np.asarray(values, dtype=float)
    if rule.dim != basis.dim:
        raise BasisError(f"rule has dimension {rule.dim}, basis has {basis.dim}")
    if values.shape[-1] != rule.size:
        raise BasisError(f"got {values.shape[-1]} values for a rule with {rule.size} nodes")
    if rule.exactness is not None and rule.exactness < 2 * basis.order:
        logger.warning(
            f"Rule {rule.rule_id} is exact to degree {rule.exactness}, "
            f"projection onto order {basis.order} needs {2 * basis.order}"
        )

    coeffs = values @ projection_matrix(rule, basis).T
    return PCExpansion(basis=basis, coeffs=coeffs, info={"method": "nisp", "rule_id": rule.rule_id})


@dataclass(frozen=True)
class CSConfig:
    """Settings of the l1-constrained least-squares fit.

    Attributes:
        tau: l1 radius, or ``"auto"`` for cross-validation
        cv_folds: Number of cross-validation folds
        solver_tol: Projected-gradient tolerance (relative to ||Lambda^T d||)
        max_iter: Iteration budget of the solver
        seed: Seed of the fold assignment
        n_tau: Size of the logarithmic tau grid
        calibration: ``"per-step"`` (cross-validate every target) or ``"once"``
        calibrate_at: Time node used by ``"once"`` (None picks the peak-variance node)
    """
    tau: Union[float, str] = "auto"
    cv_folds: int = 5
    solver_tol: float = 1e-9
    max_iter: int = 20000
    seed: int = 0
    n_tau: int = 20
    calibration: str = "per-step"
    calibrate_at: Optional[float] = None

    def __post_init__(self):
        problems = []
        if isinstance(self.tau, str):
            if self.tau != "auto":
                problems.append(f"cs.tau: must be a number or 'auto', got '{self.tau}'")
        elif not self.tau >= 0:
            problems.append(f"cs.tau: must be >= 0, got {self.tau}")
        if self.cv_folds < 2:
            problems.append(f"cs.cv_folds: must be >= 2, got {self.cv_folds}")
        if not self.solver_tol > 0:
            problems.append(f"cs.solver_tol: must be > 0, got {self.solver_tol}")
        if self.max_iter < 1:
            problems.append(f"cs.max_iter: must be >= 1, got {self.max_iter}")
        if self.n_tau < 1:
            problems.append(f"cs.n_tau: must be >= 1, got {self.n_tau}")
        if self.calibration not in CALIBRATIONS:
            problems.append(f"cs.calibration: must be one of {CALIBRATIONS}, got '{self.calibration}'")
        if problems:
            raise ConfigError(problems)

    @property
    def auto(self) -> bool:
        return isinstance(self.tau, str)


def project_l1_ball(v: np.ndarray, tau: float) -> np.ndarray:
    """Euclidean projection of ``v`` onto {x : ||x||_1 <= tau} (sort-based, exact)."""
    if tau < 0:
        raise BasisError(f"l1 radius must be >= 0, got {tau}")
    a = np.abs(v)
    if a.sum() <= tau:
        return np.array(v, dtype=float, copy=True)
    if tau == 0:
        return np.zeros_like(v, dtype=float)

    u = np.sort(a)[::-1]
    excess = np.cumsum(u) - tau
    k = np.arange(1, u.size + 1)
    positive = np.nonzero(u - excess / k > 0)[0]
    rho = positive[-1] if positive.size else 0
    theta = excess[rho] / (rho + 1.0)
    return np.sign(v) * np.maximum(a - theta, 0.0)


def _spg_l1(
    A: np.ndarray,
    d: np.ndarray,
    tau: float,
    tol: float,
    max_iter: int
) -> Tuple[np.ndarray, Dict]:
    """min 0.5 ||A c - d||^2 s.t. ||c||_1 <= tau by spectral projected gradient."""
    P = A.shape[1]
    x = np.zeros(P)
    r = d.copy()
    if tau == 0:
        return x, {
            "tau": 0.0, "iterations": 0, "residual": float(np.linalg.norm(r)),
            "converged": True, "line_search_failed": False,
        }

    lipschitz = np.linalg.norm(A, 2) ** 2
    if lipschitz == 0:
        return x, {
            "tau": tau, "iterations": 0, "residual": float(np.linalg.norm(r)),
            "converged": True, "line_search_failed": False,
        }

    g = -A.T @ r
    f = 0.5 * float(r @ r)
    scale = max(1.0, float(np.linalg.norm(A.T @ d)))
    step = 1.0 / lipschitz
    history = [f]
    converged = False
    line_search_failed = False
    it = 0

    for it in range(1, max_iter + 1):
        if np.linalg.norm(project_l1_ball(x - g, tau) - x) <= tol * scale:
            converged = True
            break

        direction = project_l1_ball(x - step * g, tau) - x
        gtd = float(g @ direction)
        if gtd >= 0:
            converged = True
            break

        # Non-monotone Armijo backtracking over the last 10 objective values
        fmax = max(history[-10:])
        lam = 1.0
        for _ in range(MAX_BACKTRACKS):
            x_new = x + lam * direction
            r_new = d - A @ x_new
            f_new = 0.5 * float(r_new @ r_new)
            if f_new <= fmax + 1e-4 * lam * gtd:
                break
            lam *= 0.5
        else:
            line_search_failed = True
            logger.warning(f"l1 line search failed at iteration {it} (tau={tau:.4g}); keeping the last accepted iterate")
            break

        g_new = -A.T @ r_new
        s = x_new - x
        y = g_new - g
        sy = float(s @ y)
        step = float(s @ s) / sy if sy > 0 else 1.0 / lipschitz
        step = min(max(step, 1e-12 / lipschitz), 1e12 / lipschitz)

        x, r, f, g = x_new, r_new, f_new, g_new
        history.append(f)

    residual = float(np.linalg.norm(r))
    if not converged and not line_search_failed:
        logger.warning(f"l1 solver stopped after {it} iterations (tau={tau:.4g}), residual {residual:.3e}")
    return x, {
        "tau": float(tau),
        "iterations": it,
        "residual": residual,
        "converged": converged,
        "line_search_failed": line_search_failed,
    }


def _l1_proxy(A: np.ndarray, d: np.ndarray) -> float:
    """l1 norm of a ridge-regularized least-squares fit."""
    gram = A.T @ A
    ridge = 1e-8 * max(np.trace(gram) / gram.shape[0], 1e-300)
    c = np.linalg.solve(gram + ridge * np.eye(gram.shape[0]), A.T @ d)
    return float(np.abs(c).sum())


def _folds(n: int, k: int, seed: int):
    perm = np.random.Generator(np.random.Philox(seed)).permutation(n)
    return np.array_split(perm, k)


def _cross_validate(A: np.ndarray, d: np.ndarray, cfg: CSConfig) -> Tuple[float, float]:
    """Chosen tau and the l1 proxy it was scaled from."""
    n = A.shape[0]
    if n < cfg.cv_folds:
        raise BasisError(f"cross-validation needs N >= cv_folds ({cfg.cv_folds}), got N={n}")
    proxy = _l1_proxy(A, d)
    if proxy == 0:
        return 0.0, 0.0

    grid = proxy * np.logspace(-3, 1, cfg.n_tau)
    folds = _folds(n, cfg.cv_folds, cfg.seed)
    errors = np.zeros(grid.size)
    for held in folds:
        train = np.setdiff1d(np.arange(n), held, assume_unique=True)
        for i, tau in enumerate(grid):
            c, _ = _spg_l1(A[train], d[train], tau, cfg.solver_tol, cfg.max_iter)
            errors[i] += np.mean((A[held] @ c - d[held]) ** 2) / len(folds)

    best = errors.min()
    # Ties go to the largest radius
    chosen = np.nonzero(errors <= best * (1.0 + 1e-9))[0][-1]
    return float(grid[chosen]), proxy


def cross_validate_tau(xis: np.ndarray, values: np.ndarray, basis: PCBasis, cfg: CSConfig) -> float:
    """K-fold cross-validated l1 radius on a log grid spanning [1e-3, 10] x proxy.

    Folds are drawn from ``cfg.seed``, so the choice is deterministic.
    Zero data yields tau = 0.
    """
    A = basis.evaluate(xis)
    tau, _ = _cross_validate(A, np.asarray(values, dtype=float), cfg)
    return tau


def cs_fit(xis: np.ndarray, values: np.ndarray, basis: PCBasis, cfg: CSConfig = CSConfig()) -> PCExpansion:
    """Sparse PC coefficients of one quantity from sample pairs (xi^(j), u(xi^(j))).

    Raises:
        BasisError: If there are no samples or shapes disagree
    """
    A = basis.evaluate(xis)
    d = np.asarray(values, dtype=float)
    if len(d) < 1 or len(d) != len(A):
        raise BasisError(f"need one value per sample, got {len(d)} values for {len(A)} samples")

    tau = _cross_validate(A, d, cfg)[0] if cfg.auto else float(cfg.tau)
    c, info = _spg_l1(A, d, tau, cfg.solver_tol, cfg.max_iter)
    info["method"] = "cs"
    return PCExpansion(basis=basis, coeffs=c, info=info)


def cs_fit_many(
    xis: np.ndarray,
    values: np.ndarray,
    basis: PCBasis,
    cfg: CSConfig = CSConfig(),
    calibrate_index: Optional[int] = None
) -> PCExpansion:
    """Fit M quantities (rows of ``values``, shape (M, N)) on shared samples.

    With ``calibration="once"`` tau is cross-validated on one row only and
    the chosen multiple of that row's l1 proxy is reused for every other row.
    """
    A = basis.evaluate(xis)
    values = np.atleast_2d(np.asarray(values, dtype=float))
    if values.shape[1] != len(A):
        raise BasisError(f"values have {values.shape[1]} columns for {len(A)} samples")
    M = values.shape[0]

    if not cfg.auto:
        taus = np.full(M, float(cfg.tau))
    elif cfg.calibration == "once":
        m0 = int(np.argmax(values.var(axis=1))) if calibrate_index is None else calibrate_index
        tau0, proxy0 = _cross_validate(A, values[m0], cfg)
        ratio = tau0 / proxy0 if proxy0 > 0 else 0.0
        taus = np.array([ratio * _l1_proxy(A, values[m]) for m in range(M)])
        logger.info(f"Calibrated tau once at row {m0}: tau={tau0:.4g} ({ratio:.4g} x proxy)")
    else:
        with ThreadPoolExecutor(max_workers=config.MAX_WORKERS) as executor:
            taus = np.array(list(executor.map(lambda m: _cross_validate(A, values[m], cfg)[0], range(M))))

    def fit_row(m: int):
        return _spg_l1(A, values[m], taus[m], cfg.solver_tol, cfg.max_iter)

    with ThreadPoolExecutor(max_workers=config.MAX_WORKERS) as executor:
        results = list(executor.map(fit_row, range(M)))

    coeffs = np.vstack([c for c, _ in results])
    info = {
        "method": "cs",
        "calibration": cfg.calibration if cfg.auto else "fixed",
        "tau": taus.tolist(),
        "residual": [i["residual"] for _, i in results],
        "converged": all(i["converged"] for _, i in results),
        "line_search_failed": any(i.get("line_search_failed", False) for _, i in results),
    }
    not_converged = sum(1 for _, i in results if not i["converged"])
    if not_converged:
        logger.warning(f"{not_converged}/{M} l1 fits did not converge")
    return PCExpansion(basis=basis, coeffs=coeffs, info=info)

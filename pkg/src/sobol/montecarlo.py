"""Pick-freeze Monte Carlo estimators of generalized indices.

Two independent matrices A, B of draws are evaluated together with one
hybrid matrix A_B^U per subset (A with the U-columns taken from B). At
every node:

    D(t)      = pooled variance of f(A) and f(B)
    D^U(t)    = mean[f(B) f(A_B^U)] - f0^2            (first order)
    D_tot^U(t)= 0.5 mean[(f(A) - f(A_B^U))^2]          (Jansen total)

Values are shifted by a pilot mean before accumulation, and every
quantity is integrated in time per sample so the bootstrap can resample
sample pairs without keeping trajectories. Several horizons [t_1, tau] share
one set of model runs: each per-sample integral is taken once per horizon.
"""

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from config import Config
from ensemble import evaluate_batch, make_rng
from errors import DegenerateVarianceError, EnsembleError, QuadratureError
from quadrature import TimeRule
from sobol.reports import SobolEntry, SobolReport
from sobol.subsets import SubsetU

config = Config()
logger = logging.getLogger(__name__)

MIN_SAMPLES = 100


def _ratios(a, b, c, correction):
    denominator = np.mean(a, axis=-1) - correction
    return (np.mean(b, axis=-1) - correction) / denominator, np.mean(c, axis=-1) / denominator, denominator


def _window_weights(time_rule: TimeRule, taus: Sequence[float]) -> Tuple[List[TimeRule], np.ndarray]:
    """Sub-horizon rules and their weights zero-padded to the full grid, one column per tau."""
    taus = [float(tau) for tau in taus]
    if not taus:
        raise QuadratureError("at least one window horizon is needed")
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise QuadratureError("window horizons must be strictly increasing")
    rules = [time_rule.restrict(tau) for tau in taus]
    W = np.zeros((time_rule.size, len(rules)))
    for k, rule in enumerate(rules):
        W[:rule.size, k] = rule.weights
    return rules, W


def _pick_freeze_integrals(model, subsets, N: int, time_rule: TimeRule, W: np.ndarray, seed: int, chunk: int):
    """Evaluate f(A), f(B), f(A_B^U) once and integrate every per-sample quantity under each column of W.

    Returns:
        pooled (K, N), first (K, S, N), total (K, S, N) and the pilot correction (K,)
    """
    Np = model.dim
    rng = make_rng(seed)
    A = rng.uniform(-1.0, 1.0, size=(N, Np))
    B = rng.uniform(-1.0, 1.0, size=(N, Np))
    t = time_rule.nodes
    K = W.shape[1]

    pooled = np.zeros((K, N))
    first = np.zeros((K, len(subsets), N))
    total = np.zeros((K, len(subsets), N))
    sum_shifted = np.zeros(t.size)
    pilot = None

    starts = range(0, N, chunk)
    for start in tqdm(starts, desc="pick-freeze", disable=not config.SHOW_PROGRESS):
        rows = slice(start, min(start + chunk, N))
        fA = evaluate_batch(model, A[rows], t)
        fB = evaluate_batch(model, B[rows], t)
        if pilot is None:
            pilot = 0.5 * (fA.mean(axis=0) + fB.mean(axis=0))
        xA, xB = fA - pilot, fB - pilot
        pooled[:, rows] = (0.5 * (xA ** 2 + xB ** 2) @ W).T
        sum_shifted += xA.sum(axis=0) + xB.sum(axis=0)
        for j, U in enumerate(subsets):
            AB = A[rows].copy()
            AB[:, U.columns] = B[rows][:, U.columns]
            fAB = evaluate_batch(model, AB, t)
            first[:, j, rows] = ((xB * (fAB - pilot)) @ W).T
            total[:, j, rows] = (0.5 * ((fA - fAB) ** 2) @ W).T

    # Squared offset of the true mean from the pilot, integrated in time
    offset = sum_shifted / (2 * N)
    correction = W.T @ offset ** 2
    return pooled, first, total, correction


def _report(pooled, first, total, correction, subsets, N, T, seed, n_boot, param_names, method) -> SobolReport:
    S_first, S_tot, denominator = _ratios(pooled, first, total, correction)
    if not denominator > 0:
        raise DegenerateVarianceError(f"Monte Carlo estimate of the integrated variance on [0, {T:g}] is not positive")

    first_se = np.full(len(subsets), np.nan)
    tot_se = np.full(len(subsets), np.nan)
    if n_boot > 1:
        boot_rng = make_rng(seed + 1)
        bf = np.empty((n_boot, len(subsets)))
        bt = np.empty((n_boot, len(subsets)))
        for b in range(n_boot):
            idx = boot_rng.integers(0, N, size=N)
            bf[b], bt[b], _ = _ratios(pooled[idx], first[:, idx], total[:, idx], correction)
        first_se, tot_se = bf.std(axis=0, ddof=1), bt.std(axis=0, ddof=1)

    entries: List[SobolEntry] = []
    for j, U in enumerate(subsets):
        entries.append(SobolEntry(
            target=U,
            label=U.label(param_names),
            S_first=float(S_first[j]),
            S_tot=float(S_tot[j]),
            first_se=float(first_se[j]),
            tot_se=float(tot_se[j]),
        ))
        logger.info(
            f"{method} {entries[-1].label} on [0, {T:g}]: S_first={S_first[j]:.4f} (se {first_se[j]:.4f}), "
            f"S_tot={S_tot[j]:.4f} (se {tot_se[j]:.4f})"
        )

    report = SobolReport(
        entries=entries,
        method=method,
        T=T,
        seed=seed,
        diagnostics={"N": N, "n_boot": n_boot, "evaluations": N * (2 + len(subsets))},
    )
    report.check(eps=max(config.REPORT_EPS, 3 * float(np.nanmax(np.r_[first_se, tot_se, 0.0]))))
    return report


def generalized_mc_windows(
    model,
    subsets: Sequence[SubsetU],
    N: int,
    time_rule: TimeRule,
    taus: Sequence[float],
    seed: int,
    n_boot: int = 200,
    chunk_size: Optional[int] = None,
    param_names: Sequence[str] = (),
    method: str = "mc"
) -> List[Tuple[float, SobolReport]]:
    """Pick-freeze reports on every growing horizon [t_1, tau] from one set of model runs.

    The model is evaluated on the full grid once; each window applies the
    weights of ``time_rule.restrict(tau)`` to the same per-node integrands.

    Args:
        model: Process with ``evaluate``/``evaluate_many`` and ``dim``
        subsets: Target subsets
        N: Rows of A and B (at least 100)
        time_rule: Full time quadrature
        taus: Strictly increasing grid nodes
        seed: Seed of A, B and of the bootstrap
        n_boot: Bootstrap resamples for standard errors (0 disables)
        chunk_size: Rows evaluated at a time (default ``Config.CHUNK_SIZE``)

    Returns:
        One (tau, SobolReport) pair per horizon

    Raises:
        QuadratureError: If the taus are not increasing grid nodes
        DegenerateVarianceError: If a window's integrated variance is not positive
    """
    if N < MIN_SAMPLES:
        raise EnsembleError(f"Monte Carlo estimator needs N >= {MIN_SAMPLES}, got N={N}")
    rules, W = _window_weights(time_rule, taus)
    pooled, first, total, correction = _pick_freeze_integrals(
        model, subsets, N, time_rule, W, seed, chunk_size or config.CHUNK_SIZE
    )
    results = []
    for k, rule in enumerate(rules):
        report = _report(
            pooled[k], first[k], total[k], float(correction[k]),
            subsets, N, rule.T, seed, n_boot, param_names, method,
        )
        results.append((float(taus[k]), report))
    logger.info(f"Computed {len(results)} Monte Carlo windows from {N * (2 + len(subsets))} model runs")
    return results


def generalized_mc_many(
    model,
    subsets: Sequence[SubsetU],
    N: int,
    time_rule: TimeRule,
    seed: int,
    n_boot: int = 200,
    chunk_size: Optional[int] = None,
    param_names: Sequence[str] = (),
    method: str = "mc"
) -> SobolReport:
    """Generalized first-order and total indices of several subsets from shared A, B.

    Args:
        model: Process with ``evaluate``/``evaluate_many`` and ``dim``
        subsets: Target subsets
        N: Rows of A and B (at least 100)
        time_rule: Time quadrature of the integrals
        seed: Seed of A, B and of the bootstrap
        n_boot: Bootstrap resamples for standard errors (0 disables)
        chunk_size: Rows evaluated at a time (default ``Config.CHUNK_SIZE``)

    Returns:
        SobolReport with bootstrap standard errors on every entry

    Raises:
        DegenerateVarianceError: If the integrated variance is not positive
    """
    return generalized_mc_windows(
        model, subsets, N, time_rule, [time_rule.T], seed, n_boot, chunk_size, param_names, method
    )[0][1]


def generalized_mc(
    model,
    U: SubsetU,
    N: int,
    time_rule: TimeRule,
    seed: int,
    n_boot: int = 200,
    param_names: Sequence[str] = ()
) -> SobolEntry:
    """Pick-freeze estimate of the generalized indices of a single subset."""
    return generalized_mc_many(model, [U], N, time_rule, seed, n_boot, param_names=param_names).entries[0]


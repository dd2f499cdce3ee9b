"""Generalized indices over growing horizons [t_1, tau]."""

import logging
from typing import Callable, List, Sequence, Tuple

import numpy as np
import pandas as pd

from errors import QuadratureError
from quadrature import TimeRule
from sobol.reports import SobolReport

logger = logging.getLogger(__name__)


def growing_window(
    compute: Callable[[TimeRule], SobolReport],
    time_rule: TimeRule,
    taus: Sequence[float]
) -> List[Tuple[float, SobolReport]]:
    """Recompute a report on the sub-horizon rule of every tau.

    ``compute`` receives ``time_rule.restrict(tau)``, which is the full rule
    itself at tau = T, so the last window reproduces the full-horizon report.

    Raises:
        QuadratureError: If the taus are not increasing grid nodes
        DegenerateVarianceError: Propagated from ``compute`` when tau lies before
            the first node with positive variance
    """
    taus = [float(tau) for tau in taus]
    if any(b <= a for a, b in zip(taus, taus[1:])):
        raise QuadratureError("window horizons must be strictly increasing")
    results = []
    for tau in taus:
        results.append((tau, compute(time_rule.restrict(tau))))
    logger.info(f"Computed {len(results)} growing windows up to tau={taus[-1] if taus else 0:g}")
    return results


def window_frame(results: List[Tuple[float, SobolReport]]) -> pd.DataFrame:
    """Long format: tau, variable, S_first, S_tot, method."""
    rows = []
    for tau, report in results:
        for e in report.entries:
            rows.append({"tau": tau, "variable": e.label, "S_first": e.S_first, "S_tot": e.S_tot, "method": report.method})
    return pd.DataFrame(rows, columns=["tau", "variable", "S_first", "S_tot", "method"])


def total_variation(frame: pd.DataFrame, lo: float, hi: float, column: str = "S_tot") -> pd.Series:
    """Sum of |increments| of each variable's curve over lo <= tau <= hi."""
    window = frame[(frame["tau"] >= lo) & (frame["tau"] <= hi)].sort_values("tau")
    return window.groupby("variable")[column].apply(lambda s: float(np.abs(np.diff(s.to_numpy())).sum()))


def ordering_changes(pointwise: pd.DataFrame, column: str = "S_tot") -> int:
    """Number of times the ranking of variables changes along a pointwise curve table.

    ``pointwise`` has columns t, variable and ``column``; undefined nodes (NaN) are skipped.
    """
    wide = pointwise.pivot(index="t", columns="variable", values=column).dropna()
    ranks = [tuple(np.argsort(-row.to_numpy())) for _, row in wide.iterrows()]
    return sum(1 for a, b in zip(ranks, ranks[1:]) if a != b)

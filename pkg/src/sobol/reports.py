"""Result containers for sensitivity estimators."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from config import Config
from sobol.subsets import SubsetU

config = Config()
logger = logging.getLogger(__name__)

METHODS = ("pointwise-nisp", "pointwise-cs", "spectral-nisp", "spectral-cs", "mc", "surrogate-mc")


@dataclass
class SobolEntry:
    """Generalized indices of one target subset.

    Attributes:
        target: Variable subset U
        label: Display name, e.g. ``"beta_H+kappa_L"``
        S_first: First-order generalized index of U
        S_tot: Total generalized index of U
        first_se: Bootstrap standard error of S_first (Monte Carlo only)
        tot_se: Bootstrap standard error of S_tot (Monte Carlo only)
        flags: Ordering violations found by ``check``
    """
    target: SubsetU
    label: str
    S_first: float
    S_tot: float
    first_se: Optional[float] = None
    tot_se: Optional[float] = None
    flags: List[str] = field(default_factory=list)

    def check(self, eps: float) -> List[str]:
        """Flag violations of 0 <= S_first <= S_tot <= 1 beyond ``eps``."""
        flags = []
        if self.S_first < -eps:
            flags.append("S_first<0")
        if self.S_first > self.S_tot + eps:
            flags.append("S_first>S_tot")
        if self.S_tot > 1 + eps:
            flags.append("S_tot>1")
        self.flags = flags
        return flags


@dataclass
class SobolReport:
    """Generalized Sobol' indices of several subsets from one method.

    Attributes:
        entries: One entry per target, in request order
        method: Pipeline tag (see METHODS)
        T: Time horizon of the integrals
        seed: Seed of the underlying sample (None for deterministic rules)
        diagnostics: Nkl, N_ord, N and other provenance
    """
    entries: List[SobolEntry]
    method: str
    T: float
    seed: Optional[int] = None
    diagnostics: Dict = field(default_factory=dict)

    def check(self, eps: Optional[float] = None) -> int:
        """Flag every entry; violations are logged, never clamped."""
        eps = config.REPORT_EPS if eps is None else eps
        count = 0
        for entry in self.entries:
            for flag in entry.check(eps):
                count += 1
                logger.warning(
                    f"{self.method}: {entry.label} violates ordering ({flag}): "
                    f"S_first={entry.S_first:.6f}, S_tot={entry.S_tot:.6f}"
                )
        return count

    def entry(self, label: str) -> SobolEntry:
        for e in self.entries:
            if e.label == label:
                return e
        raise KeyError(label)

    def totals(self) -> Dict[str, float]:
        return {e.label: e.S_tot for e in self.entries}

    def firsts(self) -> Dict[str, float]:
        return {e.label: e.S_first for e in self.entries}

    def to_frame(self) -> pd.DataFrame:
        """Columns variable, S_first, S_tot, method, T, seed."""
        return pd.DataFrame({
            "variable": [e.label for e in self.entries],
            "S_first": [e.S_first for e in self.entries],
            "S_tot": [e.S_tot for e in self.entries],
            "method": self.method,
            "T": self.T,
            "seed": -1 if self.seed is None else self.seed,
        })

    def to_dict(self) -> Dict:
        return {
            "method": self.method,
            "T": self.T,
            "seed": self.seed,
            "diagnostics": self.diagnostics,
            "entries": [
                {
                    "variable": e.label,
                    "members": list(e.target.members),
                    "S_first": e.S_first,
                    "S_tot": e.S_tot,
                    "first_se": e.first_se,
                    "tot_se": e.tot_se,
                    "flags": e.flags,
                }
                for e in self.entries
            ],
        }


@dataclass
class PointwiseIndices:
    """Classical Sobol' indices at every time node.

    Undefined nodes (variance below ``Config.DEGENERATE_RTOL`` of the peak)
    carry NaN indices and ``defined = False``.
    """
    t: np.ndarray
    D: np.ndarray
    D_first: np.ndarray
    D_tot: np.ndarray
    S_first: np.ndarray
    S_tot: np.ndarray
    defined: np.ndarray
    label: str = ""

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "t": self.t,
            "variable": self.label,
            "D": self.D,
            "D_first": self.D_first,
            "D_tot": self.D_tot,
            "S_first": self.S_first,
            "S_tot": self.S_tot,
        })


@dataclass
class FixingReport:
    """Relative error of fixing U^c at nominal values.

    Attributes:
        kept: Subset U left random
        fixed_labels: Names of the fixed variables U^c
        nominals: Nominal values of U^c, shape (M, |U^c|)
        errors: Relative error per nominal, shape (M,)
        mean_error: Monte Carlo mean of the errors
        reference_S_tot: Generalized total index of U^c
        markov: Table of eps, threshold S_tot/eps, violation rate
    """
    kept: SubsetU
    fixed_labels: List[str]
    nominals: np.ndarray
    errors: np.ndarray
    mean_error: float
    reference_S_tot: float
    markov: pd.DataFrame

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame(self.nominals, columns=self.fixed_labels)
        frame["error"] = self.errors
        return frame

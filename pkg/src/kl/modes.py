"""KL modes, their polynomial chaos surrogates, and the global-in-time surrogate."""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple, Union

import numpy as np

from ensemble import Ensemble, SampleSet
from errors import EnsembleError, OffGridError, QuadratureError
from kl.spectrum import Spectrum
from pce import CSConfig, PCBasis, PCExpansion, cs_fit_many, nisp_project
from quadrature import TimeRule

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class KLModes:
    """Discretized KL modes f_i(xi^(k)) = sum_m w_m f_c(t_m, xi^(k)) e_i(t_m).

    Attributes:
        nkl: Truncation level
        modes: Array of shape (Nkl, N)
        spectrum: Eigen context the modes were projected on
    """
    nkl: int
    modes: np.ndarray
    spectrum: Spectrum


def kl_modes(e: Ensemble, s: Spectrum, Nkl: int) -> KLModes:
    """Project a centered ensemble onto the first Nkl eigenvectors."""
    if not e.centered:
        raise EnsembleError("kl_modes needs a centered ensemble")
    if not 1 <= Nkl <= s.count:
        raise EnsembleError(f"Nkl={Nkl} outside 1..{s.count} available eigenpairs")
    weighted = e.values * e.time_rule.weights[:, None]
    return KLModes(nkl=Nkl, modes=s.eigenvectors[:, :Nkl].T @ weighted, spectrum=s)


def fit_mode_surrogates(
    modes: KLModes,
    samples: SampleSet,
    basis: PCBasis,
    method: str = "cs",
    cs: CSConfig = CSConfig()
) -> PCExpansion:
    """One PC expansion per mode, stacked (Nkl, P).

    ``method="nisp"`` needs quadrature samples; ``"cs"`` works on any draws.
    """
    if method == "nisp":
        exp = nisp_project(modes.modes, samples.as_rule(), basis)
    elif method == "cs":
        exp = cs_fit_many(samples.draws, modes.modes, basis, cs)
    else:
        raise EnsembleError(f"unknown mode surrogate method '{method}'")
    logger.info(f"Fitted {modes.nkl} mode surrogates ({method}, {basis.size} terms)")
    return exp


class KLSurrogate:
    """f̃(t_m, xi) = f̃_0(t_m) + sum_i f̃_i(xi) e_i(t_m), defined on grid nodes only.

    Behaves like a vectorized model, so it can stand in for the original
    process in Monte Carlo estimators.
    """

    vectorized = True

    def __init__(
        self,
        time_rule: TimeRule,
        mean: np.ndarray,
        eigenvectors: np.ndarray,
        expansions: PCExpansion,
        param_names: Sequence[str] = (),
        source: str = "model"
    ):
        expansions = expansions if expansions.stacked else PCExpansion(
            expansions.basis, expansions.coeffs[None, :], expansions.info
        )
        if eigenvectors.shape != (time_rule.size, expansions.coeffs.shape[0]):
            raise EnsembleError(
                f"{expansions.coeffs.shape[0]} mode surrogates do not match eigenvectors {eigenvectors.shape}"
            )
        self.time_rule = time_rule
        self.mean = np.asarray(mean, dtype=float)
        self.eigenvectors = eigenvectors
        self.expansions = expansions
        self.param_names: Tuple[str, ...] = tuple(param_names) or tuple(
            f"xi{i + 1}" for i in range(expansions.basis.dim)
        )
        self.name = f"kl-surrogate-{source}"

    @property
    def dim(self) -> int:
        return self.expansions.basis.dim

    @property
    def nkl(self) -> int:
        return self.eigenvectors.shape[1]

    def _node_indices(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if t.shape == self.time_rule.nodes.shape and np.array_equal(t, self.time_rule.nodes):
            return np.arange(self.time_rule.size)
        try:
            return np.array([self.time_rule.index_of(x) for x in t], dtype=int)
        except QuadratureError as e:
            raise OffGridError(f"KL surrogate is only defined on its time grid: {e}") from e

    def evaluate_many(self, xis: np.ndarray, t) -> np.ndarray:
        """Values at parameter vectors ``xis`` (N, Np), shape (N, len(t))."""
        idx = self._node_indices(t)
        modes = self.expansions.evaluate(xis)
        return self.mean[idx][None, :] + modes.T @ self.eigenvectors[idx].T

    def evaluate(self, xi, t) -> np.ndarray:
        return self.evaluate_many(np.atleast_2d(xi), t)[0]


def build_kl_surrogate(
    e: Ensemble,
    s: Spectrum,
    mode_surrogates: Union[PCExpansion, Sequence[PCExpansion]]
) -> KLSurrogate:
    """Global surrogate from the ensemble mean and one expansion per retained mode."""
    if isinstance(mode_surrogates, PCExpansion):
        stacked = mode_surrogates
    else:
        if not mode_surrogates:
            raise EnsembleError("need at least one mode surrogate")
        stacked = PCExpansion(
            basis=mode_surrogates[0].basis,
            coeffs=np.vstack([np.atleast_2d(m.coeffs) for m in mode_surrogates]),
        )
    nkl = stacked.coeffs.shape[0] if stacked.stacked else 1
    if nkl > s.count:
        raise EnsembleError(f"{nkl} mode surrogates but only {s.count} eigenpairs")
    return KLSurrogate(
        time_rule=e.time_rule,
        mean=e.mean,
        eigenvectors=s.eigenvectors[:, :nkl],
        expansions=stacked,
        param_names=e.param_names,
        source=e.model or "model",
    )

"""Exception hierarchy shared by every TimeSobol module.

Each class carries the process exit code the command line maps it to.
"""

from typing import Optional, Sequence


class TimeSobolError(Exception):
    """Base class for all library errors."""
    exit_code = 1


class ConfigError(TimeSobolError):
    """Study configuration is invalid.

    Attributes:
        problems: Field-level messages, e.g. ``"sampling.N: must be >= 2"``
    """
    exit_code = 2

    def __init__(self, problems: Sequence[str]):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class QuadratureError(TimeSobolError):
    """Invalid quadrature request (bad grid, node-count cap exceeded)."""


class BasisError(TimeSobolError):
    """Invalid polynomial chaos basis request."""


class EnsembleError(TimeSobolError):
    """Ensemble misuse (double centering, inconsistent dimensions)."""


class ArtifactError(TimeSobolError):
    """Missing or malformed artifact file."""


class OffGridError(TimeSobolError):
    """A time outside the quadrature grid was requested from a grid-only object."""


class DataQualityError(TimeSobolError):
    """Numerical data violates a structural property (e.g. covariance not PSD)."""


class ModelError(TimeSobolError):
    """A model could not be evaluated."""
    exit_code = 3


class IntegrationError(ModelError):
    """The ODE integrator gave up before reaching the final time.

    Attributes:
        t_reached: Last time successfully reached
    """

    def __init__(self, message: str, t_reached: float):
        self.t_reached = float(t_reached)
        super().__init__(f"{message} (reached t={self.t_reached:.6g})")


class ModelEvaluationError(ModelError):
    """A model failed on a particular sample of an ensemble.

    Attributes:
        index: Sample index k
        xi: Parameter vector of the failing sample
    """

    def __init__(self, index: int, xi: Sequence[float], cause: Exception):
        self.index = index
        self.xi = [float(x) for x in xi]
        super().__init__(f"sample {index} at xi={self.xi}: {cause}")


class DegenerateVarianceError(TimeSobolError):
    """Variance (or an eigenvalue sum) vanishes, so a ratio index is undefined."""
    exit_code = 4

    def __init__(self, message: str, where: Optional[str] = None):
        self.where = where
        super().__init__(message if where is None else f"{message} [{where}]")

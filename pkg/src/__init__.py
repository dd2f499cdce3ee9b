"""TimeSobol - generalized Sobol' sensitivity indices for time-dependent processes."""

from .config import VERSION as __version__

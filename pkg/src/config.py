"""Configuration settings for the TimeSobol library and command line."""

import os
from dataclasses import dataclass, field

VERSION = "0.1.0"


def _output_root() -> str:
    return os.environ.get("TIMESOBOL_OUTPUT_ROOT", "output")


@dataclass
class Config:
    """Application configuration settings.

    Attributes:
        OUTPUT_ROOT: Root directory for study artifacts (env TIMESOBOL_OUTPUT_ROOT)
        LEDGER_FILE: Name of the sqlite run ledger inside OUTPUT_ROOT
        NODE_CAP: Maximum quadrature entries (nodes x dimension) before refusing
        BASIS_CAP: Maximum number of PC basis functions
        MAX_WORKERS: Thread pool size for model evaluations and PC fits
        CHUNK_SIZE: Samples per chunk in streaming Monte Carlo estimators
        LANCZOS_RATIO: Requested eigenpairs / N_quad below which Lanczos is used
        EIG_CLIP_RTOL: Relative negativity tolerance for covariance eigenvalues
        REPORT_EPS: Slack when checking 0 <= S <= S_tot <= 1 in reports
        DEGENERATE_RTOL: Pointwise variance below this fraction of the peak is undefined
        SHOW_PROGRESS: Show progress bars during ensemble evaluation
    """
    OUTPUT_ROOT: str = field(default_factory=_output_root)
    LEDGER_FILE: str = "runs.db"
    NODE_CAP: int = 10**7
    BASIS_CAP: int = 20000
    MAX_WORKERS: int = 4
    CHUNK_SIZE: int = 2000
    LANCZOS_RATIO: float = 0.1
    EIG_CLIP_RTOL: float = 1e-8
    REPORT_EPS: float = 1e-8
    DEGENERATE_RTOL: float = 1e-14
    SHOW_PROGRESS: bool = False

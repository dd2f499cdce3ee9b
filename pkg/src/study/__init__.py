"""Study configuration and orchestration."""

from .config import (
    TimeConfig,
    SamplingConfig,
    PCEConfig,
    KLConfig,
    MCConfig,
    WindowConfig,
    FixConfig,
    BandsConfig,
    StudyConfig,
    validate,
    study_from_dict,
    load_study
)
from .runner import StudyRunner, execute

__all__ = [
    'TimeConfig',
    'SamplingConfig',
    'PCEConfig',
    'KLConfig',
    'MCConfig',
    'WindowConfig',
    'FixConfig',
    'BandsConfig',
    'StudyConfig',
    'validate',
    'study_from_dict',
    'load_study',
    'StudyRunner',
    'execute'
]

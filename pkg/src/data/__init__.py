"""Artifact formats, artifact directory management and the run ledger."""

from .formats import (
    atomic_write_text,
    write_json,
    read_json,
    write_frame,
    read_frame,
    write_blocks,
    read_blocks,
    write_ensemble,
    read_ensemble,
    load_external_table,
    export_ensemble_csv,
    write_spectrum,
    read_spectrum,
    write_expansion,
    read_expansion,
    write_surrogate,
    read_surrogate,
    write_report
)
from .loader import ArtifactManager
from .ledger import RunLedger, package_versions

__all__ = [
    'atomic_write_text',
    'write_json',
    'read_json',
    'write_frame',
    'read_frame',
    'write_blocks',
    'read_blocks',
    'write_ensemble',
    'read_ensemble',
    'load_external_table',
    'export_ensemble_csv',
    'write_spectrum',
    'read_spectrum',
    'write_expansion',
    'read_expansion',
    'write_surrogate',
    'read_surrogate',
    'write_report',
    'ArtifactManager',
    'RunLedger',
    'package_versions'
]

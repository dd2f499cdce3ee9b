"""Artifact directory management: reuse persisted results or recompute them."""

import logging
from pathlib import Path
from typing import Callable, Dict, Optional, TypeVar

from data.formats import read_json, write_json
from errors import ArtifactError

logger = logging.getLogger(__name__)

T = TypeVar("T")

MANIFEST = "manifest.json"

# Artifact names and the subcommand that produces each
ARTIFACTS: Dict[str, str] = {
    "ensemble.bin": "ensemble",
    "spectrum.csv": "spectrum",
    "eigenvectors.bin": "spectrum",
    "pointwise_expansion.json": "sobol",
    "surrogate": "sobol",
    "report.csv": "sobol",
    "report.json": "sobol",
    "window.csv": "window",
    "fixing.csv": "fix",
    "markov.csv": "fix",
    "bands.csv": "bands",
}


class ArtifactManager:
    """Handles artifact paths and load-or-compute decisions for one study.

    Each artifact is recorded in ``manifest.json`` with the provenance key it
    was computed under. A present artifact is reused only if its key matches
    and ``force`` is off; otherwise it is recomputed and the manifest updated.

    Args:
        out_dir: Study output directory (created on demand)
        force: Recompute every artifact regardless of what is on disk
    """

    def __init__(self, out_dir: Path, force: bool = False):
        self.out_dir = Path(out_dir)
        self.force = force
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.out_dir / name

    def _manifest(self) -> Dict[str, str]:
        path = self.path(MANIFEST)
        return read_json(path) if path.exists() else {}

    def recorded_key(self, name: str) -> Optional[str]:
        return self._manifest().get(name)

    def record(self, name: str, key: str) -> None:
        manifest = self._manifest()
        manifest[name] = key
        write_json(self.path(MANIFEST), manifest)

    def is_fresh(self, name: str, key: str) -> bool:
        return self.path(name).exists() and self.recorded_key(name) == key

    def load_or_compute(
        self,
        name: str,
        key: str,
        load: Callable[[Path], T],
        compute: Callable[[], T],
        save: Callable[[Path, T], None]
    ) -> T:
        """Reuse ``name`` when fresh, else compute, save and record it.

        Args:
            name: Artifact name inside the output directory
            key: Provenance key (hash of the config sections it depends on)
            load: Reader taking the artifact path
            compute: Producer of a new value
            save: Writer taking the artifact path and the value

        Returns:
            The loaded or computed value
        """
        path = self.path(name)
        if not self.force and self.is_fresh(name, key):
            logger.info(f"Reusing {path}")
            return load(path)
        if path.exists() and not self.force:
            logger.warning(f"{path} was computed under a different configuration; recomputing")

        value = compute()
        save(path, value)
        self.record(name, key)
        logger.info(f"Wrote {path}")
        return value

    def require(self, name: str, key: Optional[str] = None) -> Path:
        """Path of an upstream artifact that must already exist.

        Raises:
            ArtifactError: Naming the missing artifact and the subcommand producing it
        """
        path = self.path(name)
        if not path.exists():
            producer = ARTIFACTS.get(name, "run")
            raise ArtifactError(f"missing upstream artifact {path}; run the '{producer}' subcommand first")
        if key is not None and self.recorded_key(name) != key:
            logger.warning(f"{path} was computed under a different configuration")
        return path

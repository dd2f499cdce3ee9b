"""Study configuration: one YAML file parsed into a validated dataclass tree."""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Union

import yaml

from errors import ConfigError
from models import MODEL_IDS, OdeConfig
from pce import CSConfig
from sobol import METHODS

SCHEMES = ("mc", "tensor", "smolyak")
QUADRATURE_SCHEMES = ("tensor", "smolyak")
NISP_PIPELINES = ("pointwise-nisp", "spectral-nisp")
SPECTRAL_PIPELINES = ("spectral-nisp", "spectral-cs", "surrogate-mc")
SAMPLING_PIPELINES = ("mc",)
BUILTIN_DIMS = {"oscillator": 3, "cholera": 8}


@dataclass(frozen=True)
class TimeConfig:
    """Horizon and step of the uniform trapezoid grid, or an explicit grid."""
    T: Optional[float] = None
    dt: Optional[float] = None
    grid: Optional[List[float]] = None


@dataclass(frozen=True)
class SamplingConfig:
    """Parameter-space sample: Monte Carlo draws, a tensor rule or a Smolyak grid.

    Attributes:
        scheme: ``mc``, ``tensor`` or ``smolyak``
        N: Number of Monte Carlo draws
        seed: Seed of the draws
        rule: 1D family of the tensor rule (``gl`` or ``cc``)
        n: Nodes per dimension of the tensor rule
        level: Smolyak level
    """
    scheme: str = "mc"
    N: int = 1000
    seed: int = 0
    rule: str = "gl"
    n: int = 5
    level: int = 3


@dataclass(frozen=True)
class PCEConfig:
    order: int = 4


@dataclass(frozen=True)
class KLConfig:
    """Truncation and reporting of the KL spectrum.

    Attributes:
        nkl: Retained modes (takes precedence over ``ratio``)
        ratio: Variance-ratio target used when ``nkl`` is not set
        method: Eigen solver (``auto``, ``dense``, ``lanczos``)
        normalization: ``first`` (lambda_i / lambda_1) or ``trace``
        convergence_sizes: Sample sizes of the spectrum-vs-N study
        truncation_levels: Nkl values of the truncated variance curves
    """
    nkl: Optional[int] = None
    ratio: Optional[float] = None
    method: str = "auto"
    normalization: str = "first"
    convergence_sizes: List[int] = field(default_factory=list)
    truncation_levels: List[int] = field(default_factory=list)


@dataclass(frozen=True)
class MCConfig:
    N: int = 10000
    seed: int = 0
    n_boot: int = 200


@dataclass(frozen=True)
class WindowConfig:
    """Horizons tau of the growing windows (explicit list, or evenly spaced count)."""
    taus: List[float] = field(default_factory=list)
    count: int = 10


@dataclass(frozen=True)
class FixConfig:
    keep: List[str] = field(default_factory=list)
    M: int = 200
    N: int = 2000
    design: str = "lhs"
    seed: int = 0
    reference_N: int = 20000


@dataclass(frozen=True)
class BandsConfig:
    keep: List[str] = field(default_factory=list)
    N: int = 2000
    seed: int = 0
    percentiles: List[float] = field(default_factory=lambda: [2.0, 98.0])
    dilation: float = 0.1


@dataclass(frozen=True)
class StudyConfig:
    """A complete, validated study.

    Attributes:
        name: Study name used in logs
        model: ``oscillator``, ``cholera`` or ``external-table``
        table: Ensemble file backing an external table
        output: Artifact directory (relative paths live under Config.OUTPUT_ROOT)
        Np: Number of parameters (checked against the model when given)
        pipeline: Sobol' method tag
        subsets: Target subsets as lists of names or 1-based numbers (default: singletons)
    """
    name: str
    model: str
    output: str
    table: Optional[str] = None
    Np: Optional[int] = None
    pipeline: str = "spectral-cs"
    time: TimeConfig = TimeConfig()
    ode: OdeConfig = OdeConfig()
    sampling: SamplingConfig = SamplingConfig()
    pce: PCEConfig = PCEConfig()
    kl: KLConfig = KLConfig()
    cs: CSConfig = CSConfig()
    mc: MCConfig = MCConfig()
    subsets: List[Union[List[Union[str, int]], str]] = field(default_factory=list)
    window: WindowConfig = WindowConfig()
    fix: FixConfig = FixConfig()
    bands: BandsConfig = BandsConfig()

    @property
    def is_quadrature(self) -> bool:
        return self.sampling.scheme in QUADRATURE_SCHEMES

    def to_dict(self) -> Dict:
        return asdict(self)

    def section_hash(self, *sections: str) -> str:
        """sha256 of the canonical JSON of the named sections (all sections when none given)."""
        payload = self.to_dict()
        if sections:
            payload = {name: payload[name] for name in sections}
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @property
    def config_hash(self) -> str:
        return self.section_hash()


SECTIONS = {
    "time": TimeConfig,
    "ode": OdeConfig,
    "sampling": SamplingConfig,
    "pce": PCEConfig,
    "kl": KLConfig,
    "cs": CSConfig,
    "mc": MCConfig,
    "window": WindowConfig,
    "fix": FixConfig,
    "bands": BandsConfig,
}


def _build_section(name: str, raw, problems: List[str]):
    cls = SECTIONS[name]
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        problems.append(f"{name}: expected a mapping, got {type(raw).__name__}")
        return cls()
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(raw) - known)
    if unknown:
        problems.append(f"{name}: unknown keys {unknown}")
    try:
        return cls(**{k: v for k, v in raw.items() if k in known})
    except ConfigError as e:
        problems.extend(e.problems)
    except TypeError as e:
        problems.append(f"{name}: {e}")
    return cls()


def validate(cfg: StudyConfig) -> List[str]:
    """Field-level problems of an assembled config (empty when valid)."""
    problems = []
    if cfg.model not in MODEL_IDS:
        problems.append(f"model: must be one of {MODEL_IDS}, got '{cfg.model}'")
    if cfg.model == "external-table":
        if not cfg.table:
            problems.append("table: external-table model needs the path of an ensemble file")
        if cfg.pipeline in SAMPLING_PIPELINES:
            problems.append(f"pipeline: '{cfg.pipeline}' evaluates the model at new points; an external table cannot")
    if cfg.Np is not None and cfg.model in BUILTIN_DIMS and cfg.Np != BUILTIN_DIMS[cfg.model]:
        problems.append(f"Np: model '{cfg.model}' has {BUILTIN_DIMS[cfg.model]} parameters, got {cfg.Np}")
    if cfg.pipeline not in METHODS:
        problems.append(f"pipeline: must be one of {METHODS}, got '{cfg.pipeline}'")

    t = cfg.time
    if cfg.model != "external-table":
        if t.grid is None and (t.T is None or t.dt is None):
            problems.append("time: give T and dt, or an explicit grid")
        if t.T is not None and not t.T > 0:
            problems.append(f"time.T: must be > 0, got {t.T}")
        if t.dt is not None and not t.dt > 0:
            problems.append(f"time.dt: must be > 0, got {t.dt}")
        if t.grid is not None and len(t.grid) < 2:
            problems.append("time.grid: needs at least two nodes")

    s = cfg.sampling
    if s.scheme not in SCHEMES:
        problems.append(f"sampling.scheme: must be one of {SCHEMES}, got '{s.scheme}'")
    if cfg.model != "external-table" and cfg.pipeline in NISP_PIPELINES and s.scheme not in QUADRATURE_SCHEMES:
        problems.append(
            f"sampling.scheme: pipeline '{cfg.pipeline}' requires a quadrature scheme (tensor or smolyak), got '{s.scheme}'"
        )
    if s.scheme == "mc" and s.N < 2:
        problems.append(f"sampling.N: must be >= 2, got {s.N}")
    if s.scheme == "tensor":
        if s.rule not in ("gl", "cc"):
            problems.append(f"sampling.rule: must be 'gl' or 'cc', got '{s.rule}'")
        if s.n < 1:
            problems.append(f"sampling.n: must be >= 1, got {s.n}")
    if s.scheme == "smolyak" and s.level < 0:
        problems.append(f"sampling.level: must be >= 0, got {s.level}")

    if cfg.pce.order < 0:
        problems.append(f"pce.order: must be >= 0, got {cfg.pce.order}")

    k = cfg.kl
    if k.nkl is not None and k.nkl < 1:
        problems.append(f"kl.nkl: must be >= 1, got {k.nkl}")
    if k.ratio is not None and not 0 < k.ratio <= 1:
        problems.append(f"kl.ratio: must lie in (0, 1], got {k.ratio}")
    if cfg.pipeline in SPECTRAL_PIPELINES and k.nkl is None and k.ratio is None:
        problems.append(f"kl: pipeline '{cfg.pipeline}' needs kl.nkl or kl.ratio")
    if k.method not in ("auto", "dense", "lanczos"):
        problems.append(f"kl.method: must be auto, dense or lanczos, got '{k.method}'")
    if k.normalization not in ("first", "trace"):
        problems.append(f"kl.normalization: must be 'first' or 'trace', got '{k.normalization}'")

    if cfg.mc.N < 100:
        problems.append(f"mc.N: must be >= 100, got {cfg.mc.N}")
    if cfg.window.count < 1:
        problems.append(f"window.count: must be >= 1, got {cfg.window.count}")
    if cfg.fix.M < 1:
        problems.append(f"fix.M: must be >= 1, got {cfg.fix.M}")
    if cfg.fix.design not in ("lhs", "random"):
        problems.append(f"fix.design: must be 'lhs' or 'random', got '{cfg.fix.design}'")
    if len(cfg.bands.percentiles) != 2 or not 0 <= cfg.bands.percentiles[0] < cfg.bands.percentiles[1] <= 100:
        problems.append(f"bands.percentiles: need two increasing values in [0, 100], got {cfg.bands.percentiles}")
    return problems


def study_from_dict(raw: Dict, overrides: Optional[Dict] = None) -> StudyConfig:
    """Assemble and validate a StudyConfig.

    Args:
        raw: Parsed YAML mapping
        overrides: Command-line overrides, e.g. ``{"pipeline": "mc", "kl.nkl": 8}``

    Raises:
        ConfigError: Listing every problem found
    """
    if not isinstance(raw, dict):
        raise ConfigError(["config: top level must be a mapping"])
    raw = {k: (dict(v) if isinstance(v, dict) else v) for k, v in raw.items()}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        section, _, leaf = key.partition(".")
        if leaf:
            raw.setdefault(section, {})
            if raw[section] is None:
                raw[section] = {}
            raw[section][leaf] = value
        else:
            raw[key] = value

    problems: List[str] = []
    top = {f.name for f in fields(StudyConfig)}
    unknown = sorted(set(raw) - top)
    if unknown:
        problems.append(f"config: unknown keys {unknown}")
    for required in ("name", "model", "output"):
        if required not in raw:
            problems.append(f"{required}: missing")
    if problems:
        raise ConfigError(problems)

    sections = {name: _build_section(name, raw.get(name), problems) for name in SECTIONS}
    scalars = {k: v for k, v in raw.items() if k in top and k not in SECTIONS}
    if "subsets" in scalars and not isinstance(scalars["subsets"], list):
        problems.append("subsets: must be a list")
        scalars.pop("subsets")
    cfg = StudyConfig(**scalars, **sections)
    problems.extend(validate(cfg))
    if problems:
        raise ConfigError(problems)
    return cfg


def load_study(path: Union[str, Path], overrides: Optional[Dict] = None) -> StudyConfig:
    """Read a YAML study file.

    Raises:
        ConfigError: If the file is missing, is not YAML, or fails validation
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError([f"config: file {path} not found"])
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError([f"config: {path} is not valid YAML: {e}"]) from e
    return study_from_dict(raw or {}, overrides)


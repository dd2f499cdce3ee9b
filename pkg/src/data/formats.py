"""On-disk formats of study artifacts.

Binary block files start with an 8-byte little-endian header length, then a
UTF-8 JSON header listing the blocks, then the blocks themselves as
row-major little-endian float64. Every write goes to a temporary file in the
target directory and is moved into place with ``os.replace``.
"""

import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from ensemble import Ensemble, SampleSet
from errors import ArtifactError
from kl import KLSurrogate, Spectrum, spectrum_table
from models import ExternalTableModel
from pce import PCExpansion, basis_from_indices
from quadrature import TimeRule
from sobol import SobolReport

ENSEMBLE_FORMAT = "timesobol-ensemble"
FLOAT_FORMAT = "%.17g"


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return value


def atomic_write_bytes(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def write_json(path: Path, payload: Dict) -> None:
    atomic_write_text(path, json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")


def read_json(path: Path) -> Dict:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise ArtifactError(f"missing artifact {path}") from e
    except json.JSONDecodeError as e:
        raise ArtifactError(f"malformed JSON in {path}: {e}") from e


def write_frame(path: Path, frame: pd.DataFrame) -> None:
    """CSV with full float precision, so reading it back is lossless."""
    atomic_write_text(path, frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n"))


def read_frame(path: Path) -> pd.DataFrame:
    if not Path(path).exists():
        raise ArtifactError(f"missing artifact {path}")
    return pd.read_csv(path, float_precision="round_trip")


def write_blocks(path: Path, header: Dict, blocks: Dict[str, np.ndarray]) -> None:
    """Header JSON plus float64 blocks in the order given."""
    header = dict(header)
    header["blocks"] = [{"name": name, "shape": list(np.shape(arr))} for name, arr in blocks.items()]
    head = json.dumps(_jsonable(header), sort_keys=True).encode("utf-8")
    body = b"".join(np.ascontiguousarray(arr, dtype="<f8").tobytes() for arr in blocks.values())
    atomic_write_bytes(path, struct.pack("<Q", len(head)) + head + body)


def read_blocks(path: Path) -> Tuple[Dict, Dict[str, np.ndarray]]:
    path = Path(path)
    if not path.exists():
        raise ArtifactError(f"missing artifact {path}")
    raw = path.read_bytes()
    if len(raw) < 8:
        raise ArtifactError(f"{path} is truncated")
    (length,) = struct.unpack("<Q", raw[:8])
    try:
        header = json.loads(raw[8:8 + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ArtifactError(f"{path} has a malformed header: {e}") from e

    blocks = {}
    offset = 8 + length
    for spec in header.get("blocks", []):
        shape = tuple(spec["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = offset + 8 * count
        if end > len(raw):
            raise ArtifactError(f"{path}: block '{spec['name']}' runs past the end of the file")
        blocks[spec["name"]] = np.frombuffer(raw[offset:end], dtype="<f8").reshape(shape).copy()
        offset = end
    if offset != len(raw):
        raise ArtifactError(f"{path}: {len(raw) - offset} trailing bytes after the last block")
    return header, blocks


def _grid_step(t: np.ndarray) -> Optional[float]:
    h = np.diff(t)
    return float(h[0]) if np.allclose(h, h[0], rtol=1e-10, atol=0) else None


def write_ensemble(path: Path, e: Ensemble, config_hash: Optional[str] = None) -> None:
    """Raw (uncentered) values, draws and, for quadrature, node weights."""
    s = e.samples
    header = {
        "format": ENSEMBLE_FORMAT,
        "version": 1,
        "model": e.model,
        "param_names": list(e.param_names),
        "Np": s.dim,
        "N": s.size,
        "seed": s.seed,
        "T": e.time_rule.T,
        "dt": _grid_step(e.time_rule.nodes),
        "scheme": s.scheme,
        "rule_id": s.rule_id,
        "exactness": s.exactness,
        "config_hash": config_hash,
        "t": e.time_rule.nodes,
        "time_weights": e.time_rule.weights,
    }
    blocks = {"values": e.raw_values(), "draws": s.draws}
    if s.is_quadrature:
        blocks["weights"] = s.weights
    write_blocks(path, header, blocks)


def read_ensemble(path: Path) -> Tuple[Ensemble, Dict]:
    """Uncentered ensemble and its header."""
    header, blocks = read_blocks(path)
    if header.get("format") != ENSEMBLE_FORMAT:
        raise ArtifactError(f"{path} is not an ensemble file")
    for name in ("values", "draws"):
        if name not in blocks:
            raise ArtifactError(f"{path} lacks the '{name}' block")
    values, draws = blocks["values"], blocks["draws"]
    if values.shape != (len(header["t"]), header["N"]) or draws.shape != (header["N"], header["Np"]):
        raise ArtifactError(f"{path}: block shapes disagree with the header")

    samples = SampleSet(
        dim=header["Np"],
        draws=draws,
        scheme=header["scheme"],
        seed=header.get("seed"),
        weights=blocks.get("weights"),
        rule_id=header.get("rule_id"),
        exactness=header.get("exactness"),
    )
    time_rule = TimeRule(nodes=np.asarray(header["t"], dtype=float), weights=np.asarray(header["time_weights"], dtype=float))
    e = Ensemble(
        time_rule=time_rule,
        samples=samples,
        values=values,
        mean=values @ samples.averaging_weights(),
        centered=False,
        model=header.get("model", ""),
        param_names=tuple(header.get("param_names", ())),
    )
    return e, header


def load_external_table(path: Path) -> ExternalTableModel:
    """Black-box model backed by an ensemble file."""
    e, header = read_ensemble(path)
    names = e.param_names or tuple(f"xi{i}" for i in range(1, e.samples.dim + 1))
    return ExternalTableModel(
        name=header.get("model") or Path(path).stem,
        param_names=names,
        t=e.time_rule.nodes,
        draws=e.samples.draws,
        values=e.values,
    )


def export_ensemble_csv(e: Ensemble, values_path: Path, samples_path: Path) -> None:
    """Values with ``t`` in the first column and one column per sample, plus the draws."""
    values = pd.DataFrame(e.raw_values(), columns=[f"s{k}" for k in range(e.N)])
    values.insert(0, "t", e.time_rule.nodes)
    write_frame(values_path, values)

    names = list(e.param_names) or [f"xi{i}" for i in range(1, e.samples.dim + 1)]
    draws = pd.DataFrame(e.samples.draws, columns=names)
    draws["weight"] = e.samples.averaging_weights()
    write_frame(samples_path, draws)


def write_spectrum(csv_path: Path, vectors_path: Path, s: Spectrum, normalization: str = "first") -> None:
    write_frame(csv_path, spectrum_table(s, normalization))
    header = {"trace": s.trace, "clipped": s.clipped, "method": s.method}
    write_blocks(vectors_path, header, {"eigenvalues": s.eigenvalues, "eigenvectors": s.eigenvectors, "weights": s.weights})


def read_spectrum(vectors_path: Path) -> Spectrum:
    header, blocks = read_blocks(vectors_path)
    return Spectrum(
        eigenvalues=blocks["eigenvalues"],
        eigenvectors=blocks["eigenvectors"],
        weights=blocks["weights"],
        trace=float(header["trace"]),
        clipped=float(header["clipped"]),
        method=header["method"],
    )


def expansion_to_dict(exp: PCExpansion) -> Dict:
    return {
        "Np": exp.basis.dim,
        "N_ord": exp.basis.order,
        "indices": exp.basis.indices,
        "coeffs": exp.coeffs,
        "info": exp.info,
    }


def expansion_from_dict(payload: Dict) -> PCExpansion:
    basis = basis_from_indices(payload["indices"])
    if basis.dim != payload["Np"]:
        raise ArtifactError("expansion index list does not match its Np")
    return PCExpansion(basis=basis, coeffs=np.asarray(payload["coeffs"], dtype=float), info=payload.get("info", {}))


def write_expansion(path: Path, exp: PCExpansion) -> None:
    write_json(path, expansion_to_dict(exp))


def read_expansion(path: Path) -> PCExpansion:
    return expansion_from_dict(read_json(path))


def write_surrogate(directory: Path, sur: KLSurrogate) -> None:
    """Bundle directory: grid.bin (mean, eigenvectors, time rule) and modes.json."""
    directory = Path(directory)
    header = {"param_names": list(sur.param_names), "name": sur.name}
    write_blocks(directory / "grid.bin", header, {
        "t": sur.time_rule.nodes,
        "time_weights": sur.time_rule.weights,
        "mean": sur.mean,
        "eigenvectors": sur.eigenvectors,
    })
    write_expansion(directory / "modes.json", sur.expansions)


def read_surrogate(directory: Path) -> KLSurrogate:
    directory = Path(directory)
    header, blocks = read_blocks(directory / "grid.bin")
    name = header.get("name", "kl-surrogate-model")
    return KLSurrogate(
        time_rule=TimeRule(nodes=blocks["t"], weights=blocks["time_weights"]),
        mean=blocks["mean"],
        eigenvectors=blocks["eigenvectors"],
        expansions=read_expansion(directory / "modes.json"),
        param_names=header.get("param_names", ()),
        source=name.replace("kl-surrogate-", "", 1),
    )


def write_report(csv_path: Path, json_path: Path, report: SobolReport) -> None:
    write_frame(csv_path, report.to_frame())
    write_json(json_path, report.to_dict())

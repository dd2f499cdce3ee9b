"""Orchestration of a study: ensemble, spectrum, Sobol' pipelines, windows, fixing, bands."""

import logging
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config import Config
from data import (
    ArtifactManager,
    RunLedger,
    export_ensemble_csv,
    load_external_table,
    read_ensemble,
    read_expansion,
    read_spectrum,
    read_surrogate,
    write_ensemble,
    write_expansion,
    write_frame,
    write_json,
    write_report,
    write_spectrum,
    write_surrogate
)
from ensemble import (
    Ensemble,
    center,
    draw_samples,
    evaluate_ensemble,
    restrict,
    sample_covariance,
    samples_from_rule
)
from errors import ConfigError, TimeSobolError
from kl import (
    KLSurrogate,
    Spectrum,
    build_kl_surrogate,
    fit_mode_surrogates,
    kl_modes,
    nkl_for_ratio,
    nystrom_eig,
    spectrum_convergence,
    truncated_variance_curves
)
from models import get_model
from pce import PCExpansion, cs_fit_many, nisp_project, total_degree_basis
from quadrature import TimeRule, rule_1d, smolyak_rule, tensor_rule, trapezoid_rule, uniform_time_rule
from sobol import (
    SobolReport,
    SubsetU,
    band_coverage,
    fixing_error,
    generalized_mc_many,
    generalized_mc_windows,
    growing_window,
    pointwise_indices_from_pce,
    pointwise_report,
    reduced_model_bands,
    reduced_model_variance,
    singletons,
    spectral_report,
    window_frame
)
from study.config import StudyConfig

config = Config()
logger = logging.getLogger(__name__)

ENSEMBLE_SECTIONS = ("model", "table", "time", "ode", "sampling")
SAMPLING_METHODS = ("mc", "surrogate-mc")


class StudyRunner:
    """Runs the stages of one study against its artifact directory.

    Every stage reuses the artifacts of upstream stages when they were
    produced under the same configuration sections, unless ``force`` is set.
    With ``require_upstream`` the ensemble must already be on disk; single
    subcommands use this so that a missing ensemble is reported, not rebuilt.

    Args:
        cfg: Validated study configuration
        force: Recompute instead of reusing artifacts
        require_upstream: Fail with ArtifactError when the ensemble file is missing
        output_root: Root for relative output directories (default Config.OUTPUT_ROOT)
    """

    def __init__(
        self,
        cfg: StudyConfig,
        force: bool = False,
        output_root: Optional[str] = None,
        require_upstream: bool = False
    ):
        self.cfg = cfg
        self.require_upstream = require_upstream
        out = Path(cfg.output)
        if not out.is_absolute():
            out = Path(output_root or config.OUTPUT_ROOT) / out
        self.out_dir = out
        self.artifacts = ArtifactManager(out, force=force)
        self.written: List[str] = []
        self._model = None
        self._ensemble: Optional[Ensemble] = None
        self._spectrum: Optional[Spectrum] = None

    @property
    def model(self):
        if self._model is None:
            if self.cfg.model == "external-table":
                self._model = load_external_table(Path(self.cfg.table))
            else:
                self._model = get_model(self.cfg.model, self.cfg.ode)
            if self.cfg.Np is not None and self.cfg.Np != self._model.dim:
                raise ConfigError([f"Np: model '{self._model.name}' has {self._model.dim} parameters, got {self.cfg.Np}"])
        return self._model

    @property
    def param_names(self) -> Tuple[str, ...]:
        return tuple(self.model.param_names)

    def time_rule(self) -> TimeRule:
        """The ensemble's rule once one exists, so windows share its identity."""
        if self._ensemble is not None or self.cfg.model == "external-table":
            return self.ensemble().time_rule
        t = self.cfg.time
        if t.grid is not None:
            return trapezoid_rule(t.grid)
        return uniform_time_rule(t.T, t.dt)

    def samples(self):
        s = self.cfg.sampling
        dim = self.model.dim
        if s.scheme == "mc":
            return draw_samples(dim, s.N, s.seed)
        if s.scheme == "tensor":
            return samples_from_rule(tensor_rule(rule_1d(s.rule, s.n), dim))
        return samples_from_rule(smolyak_rule(s.level, dim))

    def subsets(self) -> List[SubsetU]:
        if not self.cfg.subsets:
            return singletons(self.model.dim)
        return [SubsetU.parse(spec, self.param_names) for spec in self.cfg.subsets]

    def _key(self, *extra: str) -> str:
        return self.cfg.section_hash(*ENSEMBLE_SECTIONS, *extra)

    def _save(self, name: str) -> Path:
        path = self.artifacts.path(name)
        self.written.append(str(path))
        return path

    def log_provenance(self) -> None:
        c = self.cfg
        logger.info(f"Study '{c.name}' config hash {c.config_hash}")
        logger.info(
            f"Seeds: sampling={c.sampling.seed} mc={c.mc.seed} cs={c.cs.seed} fix={c.fix.seed} bands={c.bands.seed}"
        )
        logger.info(
            f"Tolerances: ode abs={c.ode.abs_tol:g} rel={c.ode.rel_tol:g} max_steps={c.ode.max_steps}; "
            f"cs tol={c.cs.solver_tol:g} max_iter={c.cs.max_iter}; eig clip={config.EIG_CLIP_RTOL:g}"
        )

    def ensemble(self) -> Ensemble:
        """Uncentered ensemble, read from the table, reused, or evaluated."""
        if self._ensemble is not None:
            return self._ensemble
        if self.cfg.model == "external-table":
            self._ensemble = read_ensemble(Path(self.cfg.table))[0]
            return self._ensemble
        key = self._key()
        if self.require_upstream:
            path = self.artifacts.require("ensemble.bin", key)
            self._ensemble = read_ensemble(path)[0]
            return self._ensemble

        def compute() -> Ensemble:
            e = evaluate_ensemble(self.model, self.samples(), self.time_rule())
            export_ensemble_csv(e, self._save("ensemble.csv"), self._save("samples.csv"))
            return e

        self._ensemble = self.artifacts.load_or_compute(
            "ensemble.bin",
            key,
            load=lambda p: read_ensemble(p)[0],
            compute=compute,
            save=lambda p, e: write_ensemble(p, e, key),
        )
        self._save("ensemble.bin")
        return self._ensemble

    def spectrum(self) -> Spectrum:
        if self._spectrum is not None:
            return self._spectrum
        kl = self.cfg.kl

        def compute() -> Spectrum:
            e = self.ensemble()
            cov = sample_covariance(center(e))
            s = nystrom_eig(cov, e.time_rule, method=kl.method)
            levels = kl.truncation_levels or ([kl.nkl] if kl.nkl else [])
            write_frame(self._save("variance.csv"), truncated_variance_curves(s, e.time_rule, levels, cov))
            if kl.convergence_sizes and not e.samples.is_quadrature:
                sizes = [n for n in kl.convergence_sizes if 2 <= n <= e.N]
                frame = spectrum_convergence(e, sizes, mode=kl.normalization)
                write_frame(self._save("convergence.csv"), frame)
            return s

        self._spectrum = self.artifacts.load_or_compute(
            "eigenvectors.bin",
            self._key("kl"),
            load=read_spectrum,
            compute=compute,
            save=lambda p, s: write_spectrum(self._save("spectrum.csv"), p, s, kl.normalization),
        )
        self._save("eigenvectors.bin")
        return self._spectrum

    def nkl(self, s: Spectrum, override: Optional[int] = None) -> int:
        """Retained modes: the override, else kl.nkl, else the smallest count reaching kl.ratio."""
        kl = self.cfg.kl
        if override or kl.nkl:
            return min(override or kl.nkl, s.count)
        if kl.ratio is None:
            raise ConfigError(["kl: give kl.nkl or kl.ratio to truncate the spectrum"])
        return nkl_for_ratio(s, kl.ratio)

    def pointwise_expansion(self, method: str) -> PCExpansion:
        """Per-node expansion (N_quad, P) by NISP or compressive sensing."""
        basis = total_degree_basis(self.model.dim, self.cfg.pce.order)

        def compute() -> PCExpansion:
            e = self.ensemble()
            if method == "pointwise-nisp":
                return nisp_project(e.raw_values(), e.samples.as_rule(), basis)
            calibrate = self.cfg.cs.calibrate_at
            index = e.time_rule.index_of(calibrate) if calibrate is not None else None
            return cs_fit_many(e.samples.draws, e.raw_values(), basis, self.cfg.cs, calibrate_index=index)

        exp = self.artifacts.load_or_compute(
            "pointwise_expansion.json",
            self._key("pce", "cs") + method,
            load=read_expansion,
            compute=compute,
            save=write_expansion,
        )
        self._save("pointwise_expansion.json")
        return exp

    def _surrogate_for(self, e: Ensemble, s: Spectrum, nkl: Optional[int], fit: str) -> KLSurrogate:
        """Mode surrogates and global surrogate of an ensemble with spectrum ``s``."""
        n = self.nkl(s, nkl)
        modes = kl_modes(center(e), s, n)
        basis = total_degree_basis(self.model.dim, self.cfg.pce.order)
        expansions = fit_mode_surrogates(modes, e.samples, basis, method=fit, cs=self.cfg.cs)
        return build_kl_surrogate(e, s, expansions)

    def _mode_fit(self, method: str) -> str:
        if method == "spectral-nisp":
            return "nisp"
        if method == "surrogate-mc":
            return "nisp" if self.ensemble().samples.is_quadrature else "cs"
        return "cs"

    def surrogate(self, method: str, nkl: Optional[int] = None) -> KLSurrogate:
        def compute() -> KLSurrogate:
            return self._surrogate_for(self.ensemble(), self.spectrum(), nkl, self._mode_fit(method))

        sur = self.artifacts.load_or_compute(
            "surrogate",
            self._key("kl", "pce", "cs") + f"{method}:{nkl}",
            load=read_surrogate,
            compute=compute,
            save=write_surrogate,
        )
        self._save("surrogate")
        return sur

    def _spectral_compute(self, method: str, nkl: Optional[int]) -> Callable[[TimeRule], SobolReport]:
        e_full = self.ensemble()
        subsets = self.subsets()

        def compute(rule: TimeRule) -> SobolReport:
            if rule is e_full.time_rule:
                sur, s = self.surrogate(method, nkl), self.spectrum()
            else:
                e = restrict(e_full, rule)
                s = nystrom_eig(sample_covariance(center(e)), rule, method=self.cfg.kl.method)
                sur = self._surrogate_for(e, s, nkl, self._mode_fit(method))
            return spectral_report(sur.expansions, s.eigenvalues, subsets, method, rule.T, self.param_names, e_full.samples.seed)

        return compute

    def _report_compute(self, method: str, nkl: Optional[int]) -> Callable[[TimeRule], SobolReport]:
        """A function of the time rule producing the report of ``method``."""
        subsets = self.subsets()
        names = self.param_names
        if method.startswith("pointwise"):
            exp = self.pointwise_expansion(method)
            seed = self.ensemble().samples.seed

            def compute(rule: TimeRule) -> SobolReport:
                sliced = exp if rule.size == exp.coeffs.shape[0] else PCExpansion(exp.basis, exp.coeffs[:rule.size], exp.info)
                return pointwise_report(sliced, rule, subsets, method, names, seed)

            return compute
        if method.startswith("spectral"):
            return self._spectral_compute(method, nkl)

        mc = self.cfg.mc
        model = self._mc_model(method, nkl)

        def compute(rule: TimeRule) -> SobolReport:
            return generalized_mc_many(model, subsets, mc.N, rule, mc.seed, mc.n_boot, param_names=names, method=method)

        return compute

    def _mc_model(self, method: str, nkl: Optional[int]):
        return self.surrogate(method, nkl) if method == "surrogate-mc" else self.model

    def sobol(self, method: Optional[str] = None, nkl: Optional[int] = None) -> SobolReport:
        method = method or self.cfg.pipeline
        logger.info(f"Computing generalized indices with {method}")
        compute = self._report_compute(method, nkl)
        rule = self.time_rule()
        report = compute(rule)
        if method.startswith("pointwise"):
            self._write_pointwise(self.pointwise_expansion(method), rule)

        report.diagnostics.update({"config_hash": self.cfg.config_hash})
        write_report(self._save("report.csv"), self._save("report.json"), report)
        return report

    def _write_pointwise(self, exp: PCExpansion, rule: TimeRule) -> None:
        frames = [
            pointwise_indices_from_pce(exp, U, rule.nodes, self.param_names).to_frame()
            for U in self.subsets()
        ]
        write_frame(self._save("pointwise.csv"), pd.concat(frames, ignore_index=True))

    def window(self, method: Optional[str] = None, nkl: Optional[int] = None) -> pd.DataFrame:
        method = method or self.cfg.pipeline
        rule = self.time_rule()
        taus = self.cfg.window.taus or self._default_taus(rule)
        if method in SAMPLING_METHODS:
            mc = self.cfg.mc
            results = generalized_mc_windows(
                self._mc_model(method, nkl), self.subsets(), mc.N, rule, taus, mc.seed, mc.n_boot,
                param_names=self.param_names, method=method,
            )
        else:
            results = growing_window(self._report_compute(method, nkl), rule, taus)
        frame = window_frame(results)
        write_frame(self._save("window.csv"), frame)
        return frame

    def _default_taus(self, rule: TimeRule) -> List[float]:
        count = self.cfg.window.count
        idx = np.unique(np.linspace(1, rule.size - 1, count).round().astype(int))
        return [float(rule.nodes[i]) for i in idx]

    def fix(self, keep: Optional[Sequence[str]] = None):
        f = self.cfg.fix
        keep = keep or f.keep
        if not keep:
            raise ConfigError(["fix.keep: name the variables to keep random"])
        U = SubsetU.parse(list(keep), self.param_names)
        report = fixing_error(
            self.model,
            U,
            self.time_rule(),
            f.seed,
            N=f.N,
            M=f.M,
            design=f.design,
            reference_N=f.reference_N,
            param_names=self.param_names,
        )
        write_frame(self._save("fixing.csv"), report.to_frame())
        write_frame(self._save("markov.csv"), report.markov)
        write_json(self._save("fixing.json"), {
            "kept": U.label(self.param_names),
            "fixed": report.fixed_labels,
            "mean_error": report.mean_error,
            "reference_S_tot": report.reference_S_tot,
            "M": len(report.errors),
            "seed": f.seed,
        })
        return report

    def bands(self, keep: Optional[Sequence[str]] = None) -> pd.DataFrame:
        b = self.cfg.bands
        keep = keep or b.keep
        if not keep:
            raise ConfigError(["bands.keep: name the variables to keep random"])
        U = SubsetU.parse(list(keep), self.param_names)
        rule = self.time_rule()
        bands = reduced_model_bands(self.model, U, rule, b.seed, N=b.N, percentiles=tuple(b.percentiles))
        bands["covered"] = band_coverage(bands, b.dilation)
        write_frame(self._save("bands.csv"), bands)
        write_frame(self._save("bands_variance.csv"), reduced_model_variance(self.model, U, rule, b.seed, N=b.N))
        logger.info(f"Reduced band covered at {bands['covered'].mean():.1%} of nodes (dilation {b.dilation})")
        return bands

    def run(self) -> Path:
        """Ensemble, spectrum, the configured Sobol' pipeline, and any configured studies."""
        if self.cfg.pipeline != "mc":
            self.ensemble()
            self.spectrum()
        self.sobol()
        if self.cfg.window.taus:
            self.window()
        if self.cfg.fix.keep:
            self.fix()
        if self.cfg.bands.keep:
            self.bands()
        return self.out_dir


def execute(runner: StudyRunner, subcommand: str, action: Callable[[], object]) -> object:
    """Run ``action`` recorded in the run ledger under OUTPUT_ROOT.

    Errors are logged, recorded, and re-raised for the caller to map to an exit code.
    """
    ledger = RunLedger(Path(runner.out_dir.parent) / config.LEDGER_FILE)
    if not ledger.init_database() or not ledger.verify_database():
        logger.warning("Run ledger unavailable; continuing without it")
        ledger = None

    c = runner.cfg
    seeds = {"sampling": c.sampling.seed, "mc": c.mc.seed, "cs": c.cs.seed, "fix": c.fix.seed, "bands": c.bands.seed}
    tolerances = {
        "ode_abs": c.ode.abs_tol, "ode_rel": c.ode.rel_tol, "cs_tol": c.cs.solver_tol,
        "eig_clip": config.EIG_CLIP_RTOL, "report_eps": config.REPORT_EPS,
    }
    run_id = ledger.start_run(c.config_hash, subcommand, seeds, tolerances) if ledger else None
    runner.log_provenance()
    try:
        result = action()
    except (TimeSobolError, ArithmeticError, ValueError) as e:
        logger.error(f"{subcommand} failed: {e}")
        if ledger:
            ledger.finish_run(run_id, "failed", runner.written, str(e))
        raise
    if ledger:
        ledger.finish_run(run_id, "ok", sorted(set(runner.written)))
    return result

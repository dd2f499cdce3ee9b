"""Command line front-end.

Usage:
    python src/cli.py run configs/oscillator.yaml
    python src/cli.py sobol configs/oscillator.yaml --method spectral-cs --nkl 8 --order 4
    python src/cli.py fix configs/cholera.yaml --keep beta_H,kappa_L,zeta,gamma
"""

import argparse
import logging
import sys
from typing import Dict, List, Optional

import numpy as np

from errors import ConfigError, DegenerateVarianceError, TimeSobolError
from sobol import METHODS
from study import StudyRunner, execute, load_study

LOG_FORMAT = '%(asctime)s - %(levelname)s - %(message)s'

logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
logger = logging.getLogger(__name__)

SUBCOMMANDS = {
    "run": "Ensemble, spectrum, the configured Sobol' pipeline and any configured studies",
    "ensemble": "Evaluate the model on the sampling design and store the ensemble",
    "spectrum": "KL spectrum, variance curves and spectrum convergence of the ensemble",
    "sobol": "Generalized Sobol' indices with one pipeline",
    "window": "Generalized indices over growing horizons [0, tau]",
    "fix": "Error of fixing the variables outside the kept set",
    "bands": "Percentile bands of the full and the reduced model",
}


def _keep_list(value: str) -> List[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="timesobol",
        description="Generalized Sobol' indices of time-dependent processes",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="Study configuration (YAML)")
        p.add_argument("--force", action="store_true", help="Recompute artifacts already on disk")
        if name in ("run", "sobol", "window"):
            p.add_argument("--method", choices=METHODS, help="Sobol' pipeline (overrides 'pipeline')")
            p.add_argument("--nkl", type=int, help="Retained KL modes (overrides kl.nkl)")
            p.add_argument("--order", type=int, help="Total PC order (overrides pce.order)")
        if name in ("fix", "bands"):
            p.add_argument("--keep", type=_keep_list, help="Comma-separated variables kept random")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict:
    overrides = {
        "pipeline": getattr(args, "method", None),
        "kl.nkl": getattr(args, "nkl", None),
        "pce.order": getattr(args, "order", None),
    }
    keep = getattr(args, "keep", None)
    if keep is not None:
        overrides[f"{args.command}.keep"] = keep
    return overrides


def attach_run_log(runner: StudyRunner) -> logging.Handler:
    """Mirror the log into ``run.log`` inside the artifact directory."""
    handler = logging.FileHandler(runner.out_dir / "run.log", encoding="utf-8")
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logging.getLogger().addHandler(handler)
    return handler


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function; returns the process exit code."""
    args = build_parser().parse_args(argv)

    try:
        cfg = load_study(args.config, overrides_from_args(args))
    except ConfigError as e:
        for problem in e.problems:
            logger.error(f"Invalid configuration: {problem}")
        return e.exit_code

    runner = StudyRunner(cfg, force=args.force, require_upstream=args.command not in ("run", "ensemble"))
    handler = attach_run_log(runner)
    actions = {
        "run": runner.run,
        "ensemble": runner.ensemble,
        "spectrum": runner.spectrum,
        "sobol": runner.sobol,
        "window": runner.window,
        "fix": runner.fix,
        "bands": runner.bands,
    }
    try:
        execute(runner, args.command, actions[args.command])
    except ConfigError as e:
        for problem in e.problems:
            logger.error(f"Invalid configuration: {problem}")
        return e.exit_code
    except TimeSobolError as e:
        return e.exit_code
    except (ArithmeticError, ValueError, np.linalg.LinAlgError) as e:
        logger.error(f"{args.command} failed with a numerical error: {e}")
        return DegenerateVarianceError.exit_code
    finally:
        logging.getLogger().removeHandler(handler)
        handler.close()

    logger.info(f"{args.command} completed; artifacts in {runner.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

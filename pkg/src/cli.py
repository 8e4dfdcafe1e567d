import argparse
import logging
import sys
from typing import List, Optional

import numpy as np

from src.core.exceptions import ConfigError, KinematicsError, UnknownModel
from src.physics.harness import (MAX_SEED, run_discrimination_suite,
                                 run_experiment, velocity_sweep)
from src.physics.statistics import local_bound_bruteforce
from src.utils.geometry import CHSH_ALICE_SETTINGS, CHSH_BOB_SETTINGS
from src.utils.io import (load_config, run_rows, suite_rows, sweep_rows,
                          write_csv)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_KINEMATICS = 3
EXIT_INCONCLUSIVE = 4
EXIT_IO = 5


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_run(config_path: str, output_path: str, workers: Optional[int] = None) -> int:
    """Run one experiment from a YAML config and write its CSV."""
    try:
        cfg = load_config(config_path)
    except (ConfigError, UnknownModel) as exc:
        return _fail(EXIT_CONFIG, f"invalid config: {exc}")
    try:
        report = run_experiment(cfg, n_jobs=workers)
    except KinematicsError as exc:
        return _fail(EXIT_KINEMATICS, str(exc))
    try:
        write_csv(output_path, run_rows(report))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {output_path}: {exc}")
    return EXIT_OK


def cmd_suite(trials: int, seed: int, output_path: str,
              workers: Optional[int] = None) -> int:
    """Run the discrimination suite and write the verdict matrix CSV."""
    if trials < 1:
        return _fail(EXIT_CONFIG, f"trials must be >= 1, got {trials}")
    if not 0 <= seed < MAX_SEED:
        return _fail(EXIT_CONFIG, "seed must be an unsigned 64-bit integer")
    suite = run_discrimination_suite(trials, seed, n_jobs=workers)
    try:
        write_csv(output_path, suite_rows(suite))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {output_path}: {exc}")

    if suite.inconclusive:
        return _fail(EXIT_INCONCLUSIVE,
                     f"inconclusive verdicts at {trials} trials per pair; increase --trials")
    if not suite.matches_expected:
        return _fail(EXIT_MISMATCH, f"unexpected verdict matrix: {suite.verdict_matrix()}")
    logger.info("models refuted by the before-before outcome: %s",
                ", ".join(suite.refuted_models))
    return EXIT_OK


def cmd_bound() -> int:
    """Print the brute-forced local CHSH bound."""
    bound = local_bound_bruteforce(*CHSH_ALICE_SETTINGS, *CHSH_BOB_SETTINGS)
    print(f"local_bound,{bound}")
    return EXIT_OK


def cmd_sweep(config_path: str, max_beta: float, steps: int, output_path: str,
              workers: Optional[int] = None) -> int:
    """Sweep the receding speed of both devices and write S per speed."""
    if not 0.0 <= max_beta < 1.0 or steps < 1:
        return _fail(EXIT_CONFIG, "need 0 <= max-beta < 1 and steps >= 1")
    try:
        cfg = load_config(config_path)
    except (ConfigError, UnknownModel) as exc:
        return _fail(EXIT_CONFIG, f"invalid config: {exc}")
    try:
        rows = velocity_sweep(cfg, np.linspace(0.0, max_beta, steps), n_jobs=workers)
    except KinematicsError as exc:
        return _fail(EXIT_KINEMATICS, str(exc))
    try:
        write_csv(output_path, sweep_rows(rows))
    except OSError as exc:
        return _fail(EXIT_IO, f"cannot write {output_path}: {exc}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellsim",
        description="Bell-CHSH tests of local, quantum and time-ordered nonlocal "
                    "models in standard and before-before timing configurations")
    parser.add_argument("--verbose", "-v", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment from a YAML config")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--workers", type=int, default=None)

    suite = sub.add_parser("suite", help="run the model discrimination suite")
    suite.add_argument("--trials", type=int, required=True)
    suite.add_argument("--seed", type=int, required=True)
    suite.add_argument("--out", required=True)
    suite.add_argument("--workers", type=int, default=None)

    sub.add_parser("bound", help="print the local CHSH bound")

    sweep = sub.add_parser("sweep", help="sweep the receding speed of both devices")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--max-beta", type=float, required=True)
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--workers", type=int, default=None)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
        stream=sys.stderr)

    if args.command == "run":
        return cmd_run(args.config, args.out, args.workers)
    if args.command == "suite":
        return cmd_suite(args.trials, args.seed, args.out, args.workers)
    if args.command == "bound":
        return cmd_bound()
    return cmd_sweep(args.config, args.max_beta, args.steps, args.out, args.workers)

"""Command-line front end: kinwb run | sweep | verify."""

import argparse
import json
import logging
import sys

from .diagnostics import run_verification
from .errors import ConfigError, KinwbError
from .runner import ExperimentConfig, run_experiment, sweep_experiment

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _load_config(path):
    try:
        return ExperimentConfig.from_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _cmd_run(args) -> int:
    config = _load_config(args.config)
    result = run_experiment(config, output_dir=args.out)
    print(f"run complete: {len(result.snapshots)} snapshots in {result.output_dir}")
    print(f"mass drift per step (max): {result.manifest['mass_drift_per_step_max']:.3e}")
    return 0


def _cmd_sweep(args) -> int:
    config = _load_config(args.config)
    path = sweep_experiment(config, output_dir=args.out)
    print(f"sweep table written to {path}")
    with open(path) as fh:
        sys.stdout.write(fh.read())
    return 0


def _cmd_verify(args) -> int:
    results = run_verification(args.scope)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name:<{width}}  {r.detail}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(
                [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results],
                fh,
                indent=2,
            )
    n_fail = sum(not r.passed for r in results)
    print(f"{len(results) - n_fail}/{len(results)} checks passed")
    return 0 if n_fail == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kinwb",
        description="Well-balanced kinetic schemes and their exponential-fitting limits",
    )
    parser.add_argument("--verbose", action="store_true", help="enable info logging")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="time-march one configuration")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="override output directory")
    p_run.set_defaults(func=_cmd_run)
    p_sweep = sub.add_parser("sweep", help="AP error sweep over epsilon_list")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=_cmd_sweep)
    p_verify = sub.add_parser("verify", help="run the built-in verification suites")
    p_verify.add_argument(
        "--scope",
        default="all",
        choices=["all", "quadrature", "spectral", "scattering", "lemmas", "roots"],
    )
    p_verify.add_argument("--out", default=None, help="also write a JSON report")
    p_verify.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KinwbError as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())

"""Command line entry point: ``ddest estimate | sweep | bench``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .bench import format_bench, run_bench
from .config import ESTIMATORS, ConfigError, ExperimentConfig, load_config
from .experiment import rows_to_csv, rows_to_json, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_ESTIMATOR = 0, 2, 3


def _load(path) -> ExperimentConfig:
    return load_config(path) if path else ExperimentConfig()


def _write(rows, out, json_out=None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            rows_to_csv(rows, fh)
    else:
        rows_to_csv(rows, sys.stdout)
    if json_out:
        with open(json_out, "w", encoding="utf-8") as fh:
            fh.write(rows_to_json(rows))


def cmd_estimate(args) -> int:
    exp = _load(args.config)
    try:
        exp = replace(
            exp,
            snr_sweep_db=[args.snr] if args.snr is not None else exp.snr_sweep_db[-1:],
            estimators=[args.estimator] if args.estimator else exp.estimators,
            base_seed=args.seed if args.seed is not None else exp.base_seed,
            resolutions=exp.resolutions[:1],
            num_frames=args.frames if args.frames is not None else 1,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rows = run_experiment(exp)
    _write(rows, args.out, args.json)
    failed = [r for r in rows if r.failures]
    for r in failed:
        print(f"error: {r.estimator} failed on {r.failures} frame(s): {r.error}", file=sys.stderr)
    return EXIT_ESTIMATOR if failed else EXIT_OK


def cmd_sweep(args) -> int:
    exp = _load(args.config)
    if args.frames is not None:
        try:
            exp = replace(exp, num_frames=args.frames)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    rows = run_experiment(exp)
    _write(rows, args.out, args.json)
    return EXIT_OK


def _scales(text):
    try:
        vals = [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid scale list {text!r}")
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("grid scales must be positive")
    return vals


def cmd_bench(args) -> int:
    try:
        rows = run_bench(args.grid_scale, base_r=args.base_r, iterations=args.iterations, repeats=args.repeats)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    print(format_bench(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ddest", description="Delay-Doppler channel estimation experiments")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("estimate", help="run one SNR point for one estimator")
    e.add_argument("--config")
    e.add_argument("--snr", type=float)
    e.add_argument("--estimator", choices=ESTIMATORS)
    e.add_argument("--seed", type=int)
    e.add_argument("--frames", type=int, help="frames to average (default 1)")
    e.add_argument("--out")
    e.add_argument("--json")
    e.set_defaults(func=cmd_estimate)

    s = sub.add_parser("sweep", help="full NMSE sweep over the configured SNRs, resolutions and estimators")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--json")
    s.add_argument("--frames", type=int)
    s.set_defaults(func=cmd_sweep)

    b = sub.add_parser("bench", help="1D vs 2D wall-time scaling")
    b.add_argument("--grid-scale", type=_scales, default=[1.0, 2.0])
    b.add_argument("--base-r", type=float, default=0.25)
    b.add_argument("--iterations", type=int, default=10)
    b.add_argument("--repeats", type=int, default=3)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

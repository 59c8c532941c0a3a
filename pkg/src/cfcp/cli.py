"""Command line entry point: ``cfcp run | sweep | gen``.

Failures exit nonzero and print one JSON object to stderr with the keys
``error`` (exception class name) and ``message``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .dataset import attach_counterfactuals, save_csv
from .errors import CFCPError, ConfigError
from .harness import ExperimentConfig, emit_results, emit_sweep, noise_sweep, run_experiment
from .rng import make_rng
from .scm import SynthClassification, SynthRegression

_EXIT_USAGE = 2
_EXIT_FAILURE = 1


def _parse_sigmas(text: str) -> list:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"--sigmas must be a comma-separated list of numbers, got {text!r}") from None
    if not vals:
        raise ConfigError("--sigmas is empty")
    return vals


def _load_config(path: str) -> ExperimentConfig:
    try:
        return ExperimentConfig.from_json(path)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _cmd_run(args) -> None:
    cfg = _load_config(args.config)
    rows = run_experiment(cfg, jobs=args.jobs)
    emit_results(rows, args.out or cfg.output, args.format)


def _cmd_sweep(args) -> None:
    cfg = _load_config(args.config)
    sigmas = _parse_sigmas(args.sigmas) if args.sigmas else None
    rows = noise_sweep(cfg, sigmas, jobs=args.jobs)
    emit_sweep(rows, args.out or cfg.output, args.format)


def _cmd_gen(args) -> None:
    if args.n < 1:
        raise ConfigError(f"--n must be positive, got {args.n}")
    if not 0 <= args.seed < 2**64:
        raise ConfigError("--seed must be an unsigned 64-bit integer")
    rng = make_rng(args.seed, "gen/data")
    if args.scm == "reg":
        scm = SynthRegression()
    else:
        scm = SynthClassification.sample(rng.child("scm"))
    ds = attach_counterfactuals(scm.generate(args.n, rng), scm)
    save_csv(ds, args.out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfcp", description="Counterfactually fair conformal prediction")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="JSON file mirroring ExperimentConfig")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
        sp.add_argument("--out", default=None, help="output file (default: config 'output' or stdout)")

    run = sub.add_parser("run", help="run the method matrix and print aggregated metrics")
    common(run)
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="CSD of every method across counterfactual noise levels")
    common(sweep)
    sweep.add_argument("--sigmas", default=None, help="comma-separated noise levels, e.g. 0,0.2,0.4")
    sweep.set_defaults(func=_cmd_sweep)

    gen = sub.add_parser("gen", help="write a synthetic dataset with oracle counterfactuals to CSV")
    gen.add_argument("--scm", choices=("reg", "clf"), required=True)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=_cmd_gen)
    return p


def _fail(exc: BaseException, code: int) -> int:
    record = {"error": type(exc).__name__, "message": str(exc)}
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        return _fail(ConfigError("invalid command line arguments"), _EXIT_USAGE)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except CFCPError as exc:
        return _fail(exc, _EXIT_FAILURE)
    except OSError as exc:
        return _fail(exc, _EXIT_FAILURE)
    return 0


if __name__ == "__main__":
    sys.exit(main())

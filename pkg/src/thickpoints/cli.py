"""Command-line front end: flat key=value configs, experiment dispatch and
CSV/JSON emission.

One config describes one experiment.  Outputs are a CSV of per-replica records
(byte-identical across reruns of the same config) plus a JSON summary.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import replace

from . import __version__
from .cue import eval_field, sample_verblunsky
from .montecarlo import (
    Experiment,
    ExperimentConfig,
    ReplicaRecord,
    Summary,
    derive_seed,
    replica_stream,
    run_experiment,
)
from .special_fn import GammaConvention

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_IO_ERROR = 3

_SUBCOMMAND_EXPERIMENTS = {
    "verify-moments": Experiment.MOMENT_CHECK,
    "trace-cov": Experiment.TRACE_COVARIANCE,
    "fk-test": Experiment.FK_TEST,
    "nu-mu": Experiment.NU_MU_DISCREPANCY,
    "gaussian-gmc": Experiment.GAUSSIAN_GMC,
    "kernel-check": Experiment.KERNEL_CHECKS,
}

_KEY_HELP = {
    "n": "matrix dimension N (int, default 64)",
    "grid_factor": "grid oversampling factor, M = grid_factor*N (int >= 4, default 16)",
    "gamma": "field exponent / thick-point level (float, default 0.5)",
    "convention": "gamma scale: 'theorem' (range (0,sqrt 2)) or 'conjecture' (range (0,1)); default theorem",
    "eta": "barrier slack and mesoscopic-depth parameter (float in (0,1), default 0.2)",
    "ell": "shallowest barrier level; enables the barrier diagnostic (int, default off)",
    "L": "deepest barrier level (int, default auto = floor((1-eta) log N))",
    "kmax": "number of power traces / Fourier modes (int, default experiment-specific)",
    "replicas": "number of Monte Carlo replicas (int >= 1, default 1)",
    "master_seed": "64-bit master seed; replica streams are derived from it (default 0)",
    "g_shift": "constant shift of the thick-point threshold (float, default 0)",
    "output_path": "basename for <base>.csv and <base>.json outputs",
}

_PARSERS = {
    "n": int,
    "grid_factor": int,
    "gamma": float,
    "eta": float,
    "ell": int,
    "L": int,
    "kmax": int,
    "replicas": int,
    "master_seed": int,
    "g_shift": float,
    "output_path": str,
}


class ConfigError(ValueError):
    pass


def _parse_value(key: str, raw: str, where: str):
    if key == "convention":
        try:
            return GammaConvention(raw.strip().lower())
        except ValueError:
            raise ConfigError(f"{where}: convention must be 'theorem' or 'conjecture', got {raw!r}")
    if key not in _PARSERS:
        raise ConfigError(f"{where}: unknown key {key!r}")
    try:
        return _PARSERS[key](raw.strip())
    except ValueError:
        raise ConfigError(f"{where}: cannot parse {key} value {raw!r}")


def parse_config(text: str, experiment: Experiment, validate: bool = True) -> ExperimentConfig:
    """Parse `key = value` lines (# comments) into a validated config.

    Pass validate=False when overrides will be applied afterwards.
    """
    fields: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        fields[key] = _parse_value(key, raw, f"line {lineno} key {key!r}")
    config = ExperimentConfig(experiment=experiment, **fields)
    if validate:
        try:
            config.validate()
        except ValueError as exc:
            raise ConfigError(str(exc))
    return config


def apply_overrides(config: ExperimentConfig, overrides: list[str]) -> ExperimentConfig:
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override {item!r} must have the form key=value")
        key, raw = (part.strip() for part in item.split("=", 1))
        config = replace(config, **{key: _parse_value(key, raw, f"override {key!r}")})
    try:
        config.validate()
    except ValueError as exc:
        raise ConfigError(str(exc))
    return config


def _fmt(value: float) -> str:
    return repr(float(value))


def emit(records: list[ReplicaRecord], summary: Summary, config: ExperimentConfig,
         base_path: str, wallclock: float) -> tuple[str, str]:
    """Write <base>.csv (records) and <base>.json (summary); returns the paths."""
    csv_path = f"{base_path}.csv"
    json_path = f"{base_path}.json"
    names = list(records[0].scalars) if records else []
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replica_index", "derived_seed", *names])
        for rec in records:
            writer.writerow(
                [rec.replica_index, rec.derived_seed, *(_fmt(rec.scalars[k]) for k in names)]
            )
    config_echo = {
        "experiment": config.experiment.value,
        "n": config.n,
        "grid_factor": config.grid_factor,
        "gamma": config.gamma,
        "convention": config.convention.value,
        "eta": config.eta,
        "ell": config.ell,
        "L": config.L,
        "kmax": config.kmax,
        "replicas": config.replicas,
        "master_seed": config.master_seed,
        "g_shift": config.g_shift,
    }
    payload = {
        "config_echo": config_echo,
        "estimates": {
            name: {"mean": summary.mean[name], "stderr": summary.stderr[name]}
            for name in summary.mean
        },
        "wallclock_seconds": wallclock,
        "version": __version__,
    }
    with open(json_path, "w") as fh:
        json.dump(payload, fh, indent=2, allow_nan=True)
        fh.write("\n")
    return csv_path, json_path


def _emit_sample(config: ExperimentConfig, base_path: str, wallclock: float) -> str:
    """Field samples in long format: one row per (replica, grid point)."""
    csv_path = f"{base_path}.csv"
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["replica_index", "derived_seed", "theta", "value"])
        for i in range(config.replicas):
            seed = derive_seed(config.master_seed, i)
            coeffs = sample_verblunsky(config.n, replica_stream(config.master_seed, i))
            sample = eval_field(coeffs, config.grid_factor * config.n)
            for theta, value in zip(sample.theta, sample.values):
                writer.writerow([i, seed, _fmt(theta), _fmt(value)])
    return csv_path


def _load_config(args, experiment: Experiment) -> ExperimentConfig:
    if args.config:
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}")
        config = parse_config(text, experiment, validate=False)
    else:
        config = ExperimentConfig(experiment=experiment)
    config = apply_overrides(config, args.set or [])  # validates the final config
    if args.output:
        config = replace(config, output_path=args.output)
    return config


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("config", nargs="?", help="path to a key=value config file")
    sub.add_argument(
        "--set",
        action="append",
        metavar="KEY=VALUE",
        help="override a config key after the file is parsed",
    )
    sub.add_argument("-o", "--output", help="output basename (overrides output_path)")
    keys = "\n".join(f"  {key:<12} {desc}" for key, desc in _KEY_HELP.items())
    sub.epilog = "config keys:\n" + keys
    sub.formatter_class = argparse.RawDescriptionHelpFormatter


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thickpoints",
        description="Monte Carlo lab for thick points of CUE characteristic "
        "polynomials and Gaussian log-correlated fields",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="subcommand", required=True)
    descriptions = {
        "sample": "draw field samples and write them as CSV",
        "verify-moments": "Monte Carlo check of the exact finite-N moment formula",
        "trace-cov": "empirical covariance of power traces against min(k, N)",
        "fk-test": "normalized thick-point mass against the limiting law",
        "nu-mu": "thick-point vs exponential measure discrepancy (and barrier)",
        "gaussian-gmc": "normalized Gaussian chaos mass and stability",
        "kernel-check": "deterministic kernel bound checks",
    }
    for name, desc in descriptions.items():
        sub = subs.add_parser(name, help=desc, description=desc)
        _add_common(sub)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.monotonic()
    try:
        if args.subcommand == "sample":
            config = _load_config(args, Experiment.MOMENT_CHECK)
            base = config.output_path or "sample"
            path = _emit_sample(config, base, time.monotonic() - started)
            print(f"wrote {path}")
            return EXIT_OK
        experiment = _SUBCOMMAND_EXPERIMENTS[args.subcommand]
        config = _load_config(args, experiment)
        records, summary = run_experiment(config)
        print(f"completed {config.replicas} replicas of {experiment.value}")
        base = config.output_path or experiment.value
        csv_path, json_path = emit(
            records, summary, config, base, time.monotonic() - started
        )
        print(f"wrote {csv_path} and {json_path}")
        return EXIT_OK
    except ConfigError as exc:
        print(f"error: category=config {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except OSError as exc:
        print(f"error: category=io {exc}", file=sys.stderr)
        return EXIT_IO_ERROR
    except ValueError as exc:
        print(f"error: category=config {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())

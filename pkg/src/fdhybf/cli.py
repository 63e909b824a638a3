"""Command-line front end for config-driven Monte-Carlo sweeps.

Override precedence, lowest to highest: named profile, config file,
FDHYBF_-prefixed environment variables, command-line flags.
"""

import argparse
import dataclasses
import json
import os
import sys

from .config import PROFILES, field_names
from .errors import CapacityError, ConfigError
from .sweep import SWEEP_KEYS, emit_csv, load_config, run_sweep

ENV_PREFIX = "FDHYBF_"

_AXIS_SHORTHAND = {"ldr": "ldr_db", "snr": "snr_db", "rf": "rf_chains"}


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="fdhybf",
        description="Full-duplex hybrid beamforming simulation sweeps.")
    commands = parser.add_subparsers(dest="command", required=True)
    sim = commands.add_parser(
        "simulate", help="run a sweep and emit a CSV of paired results")
    sim.add_argument("--config", required=True,
                     help="JSON file with config fields and a sweep block")
    sim.add_argument("--sweep", choices=sorted(_AXIS_SHORTHAND),
                     help="experiment axis; omit to run the base config")
    sim.add_argument("--values",
                     help="comma-separated axis values, e.g. -80,-60,-40")
    sim.add_argument("--schemes",
                     help="comma-separated scheme ids to run")
    sim.add_argument("--realizations", type=int,
                     help="number of paired channel realizations")
    sim.add_argument("--seed", type=int, help="master seed")
    sim.add_argument("--out", help="output CSV path")
    sim.add_argument("--profile", choices=sorted(PROFILES),
                     help="named base parameter set applied before the file")
    sim.add_argument("--workers", type=int,
                     help="concurrent realization processes (default 1)")
    return parser


def _parse_env_value(raw):
    try:
        return json.loads(raw)
    except ValueError:
        return raw


def _env_overrides():
    """Config and sweep overrides drawn from FDHYBF_* variables."""
    cfg_updates, sweep_updates = {}, {}
    known_cfg = set(field_names())
    for name in sorted(os.environ):
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX):].lower()
        if key == "workers":
            continue  # resolved alongside the flag
        value = _parse_env_value(os.environ[name])
        if key in ("values", "schemes") and isinstance(value, str):
            value = [item for item in value.split(",") if item]
        if isinstance(value, list):
            value = tuple(value)
        if key in known_cfg:
            cfg_updates[key] = value
        elif key in SWEEP_KEYS:
            sweep_updates[key] = value
        else:
            raise ConfigError(f"{name}: unknown override")
    return cfg_updates, sweep_updates


def _parse_values(text):
    try:
        return tuple(float(item) for item in text.split(",") if item)
    except ValueError as exc:
        raise ConfigError(f"--values: {exc}") from exc


def _flag_overrides(args):
    updates = {}
    if args.sweep is not None:
        updates["axis"] = _AXIS_SHORTHAND[args.sweep]
    if args.values is not None:
        updates["values"] = _parse_values(args.values)
    if args.schemes is not None:
        updates["schemes"] = tuple(
            item for item in args.schemes.split(",") if item)
    if args.realizations is not None:
        updates["realizations"] = args.realizations
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out is not None:
        updates["out"] = args.out
    return updates


def _resolve_workers(args):
    if args.workers is not None:
        return args.workers
    raw = os.environ.get(ENV_PREFIX + "WORKERS")
    if raw is not None:
        try:
            return int(raw)
        except ValueError as exc:
            raise ConfigError(f"{ENV_PREFIX}WORKERS: {exc}") from exc
    return 1


def _simulate(args):
    profile = PROFILES[args.profile] if args.profile else None
    cfg, spec = load_config(args.config, profile=profile)
    cfg_env, sweep_env = _env_overrides()
    try:
        if cfg_env:
            cfg = cfg.replace(**cfg_env).validate()
        updates = dict(sweep_env)
        updates.update(_flag_overrides(args))
        spec = dataclasses.replace(spec, cfg=cfg, **updates).validate()
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"overrides: {exc}") from exc
    result = run_sweep(spec, workers=_resolve_workers(args))
    emit_csv(result, spec.out)
    print(f"wrote {len(result.rows)} rows to {spec.out}")
    return 0


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return _simulate(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except CapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

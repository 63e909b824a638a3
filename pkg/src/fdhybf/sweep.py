"""Monte-Carlo sweep runner: paired realizations over one experiment axis.

A sweep varies exactly one axis (base-station distortion level, SNR, or
RF-chain count) over a list of values and runs a list of benchmark
schemes on shared channel realizations. Channel draws and solver
initialization are keyed by (master seed, realization) only, so every
scheme and axis value sees identical propagation — rows are paired by
construction. Results serialize to CSV with round-trip float formatting.
"""

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import SCHEMES, run_scheme
from .channel import generate_channels
from .config import SystemConfig, field_names
from .errors import CapacityError, ConfigError, FdhybfError
from .optimizer import SolverOptions

AXES = ("ldr_db", "snr_db", "rf_chains", "none")

CSV_HEADER = ("scheme", "axis", "axis_value", "realization", "seed",
              "wsr_nats", "wsr_bits", "iters", "runtime_s", "max_violation")

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class SweepSpec:
    """One experiment: an axis, its values, schemes, and realization count.

    axis "none" runs the base configuration once per realization; its
    single placeholder value keeps the one-row-per-cell CSV shape.
    """

    cfg: SystemConfig
    axis: str = "none"
    values: tuple = (0.0,)
    schemes: tuple = SCHEMES
    realizations: int = 20
    seed: int = 0
    out: str = "results.csv"

    def validate(self):
        if self.axis not in AXES:
            raise ConfigError(
                f"sweep.axis: must be one of {AXES}, got {self.axis!r}")
        if not self.values:
            raise ConfigError("sweep.values: must be non-empty")
        if not self.schemes:
            raise ConfigError("sweep.schemes: must be non-empty")
        for scheme in self.schemes:
            if scheme not in SCHEMES:
                raise ConfigError(
                    f"sweep.schemes: unknown scheme {scheme!r}; pick from "
                    f"{SCHEMES}")
        if not isinstance(self.realizations, int) or self.realizations < 1:
            raise ConfigError(
                f"sweep.realizations: must be a positive integer, got "
                f"{self.realizations!r}")
        if not isinstance(self.seed, int):
            raise ConfigError(
                f"sweep.seed: must be an integer, got {self.seed!r}")
        return self


@dataclass(frozen=True)
class SweepRow:
    """One scheme on one axis value and one channel realization."""

    scheme: str
    axis: str
    axis_value: float
    realization: int
    seed: int
    wsr_nats: float
    wsr_bits: float
    iters: int
    runtime_s: float
    max_violation: float


@dataclass(frozen=True)
class SweepResult:
    """All rows of a sweep, in canonical (value, scheme, realization)
    order."""

    rows: tuple


SWEEP_KEYS = ("axis", "values", "schemes", "realizations", "seed", "out")


def _coerce_config_value(key, value):
    """JSON lists become tuples so the frozen config stays hashable."""
    if isinstance(value, list):
        return tuple(value)
    return value


def build_spec(cfg, sweep_fields):
    """SweepSpec from a flat mapping of sweep keys, defaults filled in."""
    unknown = set(sweep_fields) - set(SWEEP_KEYS)
    if unknown:
        name = sorted(unknown)[0]
        raise ConfigError(f"sweep.{name}: unknown field")
    fields = dict(sweep_fields)
    for key in ("values", "schemes"):
        if key in fields:
            fields[key] = tuple(fields[key])
    return SweepSpec(cfg=cfg, **fields).validate()


def load_config(path, profile=None):
    """Parse a JSON config file into a validated config and sweep spec.

    Top-level keys are flat SystemConfig field names; the optional
    "sweep" object holds axis/values/schemes/realizations/seed/out.
    Unspecified fields keep the full-scale defaults, or the named
    profile's when one is given. Every schema problem raises a config
    error naming the offending field path.
    """
    try:
        with open(path, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config file: top level must be a JSON object")
    known = set(field_names())
    overrides = {}
    sweep_fields = {}
    for key, value in raw.items():
        if key == "sweep":
            if not isinstance(value, dict):
                raise ConfigError("sweep: must be a JSON object")
            sweep_fields = value
        elif key in known:
            overrides[key] = _coerce_config_value(key, value)
        else:
            raise ConfigError(f"{key}: unknown config field")
    try:
        if profile is not None:
            cfg = profile(**overrides)
        else:
            cfg = SystemConfig(**overrides).validate()
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config file: {exc}") from exc
    return cfg, build_spec(cfg, sweep_fields)


def child_seed(master, realization):
    """Per-realization seed shared by every scheme and axis value."""
    sequence = np.random.SeedSequence([int(master), int(realization)])
    return int(sequence.generate_state(1)[0])


def axis_config(cfg, axis, value):
    """Base config with one axis value applied.

    The distortion axis moves only the base-station pair; user-side
    coefficients keep their configured level. The RF axis sets both
    chain counts to the same value.
    """
    if axis == "ldr_db":
        return cfg.replace(bs_tx_ldr_db=float(value),
                           bs_rx_ldr_db=float(value))
    if axis == "snr_db":
        return cfg.replace(snr_db=float(value))
    if axis == "rf_chains":
        return cfg.replace(tx_rf=int(value), rx_rf=int(value))
    return cfg


def _run_realization(cfg, axis, values, schemes, master, realization):
    """All (value, scheme) cells of one realization, in value-major order.

    A run that fails inside the solver is recorded as a NaN-rate row so
    the sweep continues; capacity overruns abort the whole sweep since
    every row would hit the same limit.
    """
    seed = child_seed(master, realization)
    rows = []
    for value in values:
        cfg_v = axis_config(cfg, axis, value).validate()
        channels = generate_channels(cfg_v, seed=seed,
                                     realization=realization)
        for scheme in schemes:
            start = time.monotonic()
            try:
                result = run_scheme(scheme, channels, cfg_v,
                                    SolverOptions(seed=seed))
                row = SweepRow(
                    scheme=scheme, axis=axis, axis_value=float(value),
                    realization=realization, seed=seed,
                    wsr_nats=result.wsr_nats,
                    wsr_bits=result.wsr_nats / _LN2,
                    iters=result.iterations,
                    runtime_s=time.monotonic() - start,
                    max_violation=result.max_violation)
            except CapacityError:
                raise
            except FdhybfError:
                row = SweepRow(
                    scheme=scheme, axis=axis, axis_value=float(value),
                    realization=realization, seed=seed,
                    wsr_nats=float("nan"), wsr_bits=float("nan"), iters=0,
                    runtime_s=time.monotonic() - start,
                    max_violation=float("nan"))
            rows.append(row)
    return rows


def run_sweep(spec, workers=1):
    """Execute a sweep; realizations run concurrently when workers > 1.

    Row order is (axis value, scheme, realization) regardless of worker
    count or completion order, so emission is reproducible.
    """
    spec = spec.validate()
    for value in spec.values:
        axis_config(spec.cfg, spec.axis, value).validate()
    args = [(spec.cfg, spec.axis, spec.values, spec.schemes, spec.seed, r)
            for r in range(spec.realizations)]
    if workers <= 1:
        per_realization = [_run_realization(*a) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_realization, *a) for a in args]
            per_realization = [f.result() for f in futures]
    rows = []
    for vi in range(len(spec.values)):
        for si in range(len(spec.schemes)):
            for r in range(spec.realizations):
                rows.append(per_realization[r][vi * len(spec.schemes) + si])
    return SweepResult(rows=tuple(rows))


def emit_csv(result, path):
    """Write rows with repr round-trip floats, UTF-8, LF line endings."""
    if not result.rows:
        raise ValueError("emit_csv needs at least one row")
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in result.rows:
            writer.writerow([
                row.scheme, row.axis, repr(row.axis_value),
                row.realization, row.seed, repr(row.wsr_nats),
                repr(row.wsr_bits), row.iters, repr(row.runtime_s),
                repr(row.max_violation),
            ])


def read_csv(path):
    """Parse an emitted file back into SweepRow tuples."""
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ConfigError(
                f"csv header: expected {','.join(CSV_HEADER)}")
        rows = []
        for record in reader:
            rows.append(SweepRow(
                scheme=record[0], axis=record[1],
                axis_value=float(record[2]), realization=int(record[3]),
                seed=int(record[4]), wsr_nats=float(record[5]),
                wsr_bits=float(record[6]), iters=int(record[7]),
                runtime_s=float(record[8]),
                max_violation=float(record[9])))
    return SweepResult(rows=tuple(rows))

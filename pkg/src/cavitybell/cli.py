"""Command-line interface: dataset regeneration, regime checks, pipeline runs.

Subcommands
    fig2          no-emission probability and fidelity grid, two-level scheme
    fig6          same for the four-level Raman scheme
    bell-surface  |B| over (pulse area, angle step)
    pipeline      simulated Bell measurement, JSON report
    validate      working-regime report, exit 1 on any warning

Configuration is INI-style with per-module sections; every value can be
overridden with repeatable ``--set section.key=value`` flags.  Commands are
pure functions of the configuration: a rerun writes byte-identical output.
Exit codes: 0 success, 1 regime/validation failure, 2 configuration error,
3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bell import bell_surface
from .core import ConvergenceError, HilbertDims
from .models import FourLevelParams, TwoLevelParams, validate_regime
from .montecarlo import (
    FourLevelPreparation,
    IdealPreparation,
    TwoLevelPreparation,
    estimate_bell,
    prepare_pair,
)
from .protocols import (
    PulseSpec,
    four_level_pulse_duration,
    prepare_four_level,
    prepare_two_level,
)

__all__ = [
    "ConfigError",
    "RunConfig",
    "SweepAxis",
    "REPORT_SCHEMA",
    "load_config",
    "cmd_fig2",
    "cmd_fig6",
    "cmd_bell_surface",
    "cmd_pipeline",
    "cmd_validate",
    "main",
]

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3

SEED_ENV_VAR = "CAVITYBELL_SEED"


class ConfigError(ValueError):
    """Configuration problem; the message names the offending key."""


@dataclass(frozen=True)
class SweepAxis:
    name: str
    min: float
    max: float
    points: int
    scale: str = "log"

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.min, self.max, self.points)
        return np.linspace(self.min, self.max, self.points)


_TWO_LEVEL_KEYS = ("kappa", "gamma", "omega1", "omega2")
_FOUR_LEVEL_KEYS = (
    "kappa", "gamma2", "gamma3", "delta2", "delta3",
    "omega0", "omega1", "omega_i1", "omega_i2",
)


@dataclass
class RunConfig:
    """Everything a command needs; defaults reproduce the reference figures."""

    model: str = "two-level"
    seed: int = 0
    jobs: int = field(default_factory=lambda: os.cpu_count() or 1)
    out: str | None = None
    fmt: str = "csv"
    n_runs: int = 100000
    vartheta: float = float(np.pi / 4.0)
    failure_policy: str = "discard"
    forced_p0: float | None = None
    alpha: complex = 1.0 + 0j
    n_max: int = 2
    two_level: dict = field(
        default_factory=lambda: {
            "kappa": 1.0, "gamma": 0.0, "omega1": 0.01 + 0j, "omega2": -0.01 + 0j,
        }
    )
    four_level: dict = field(
        default_factory=lambda: {
            "kappa": 0.0025, "gamma2": 0.0, "gamma3": 0.0,
            "delta2": 400.0, "delta3": 400.0,
            "omega0": 2.0 + 0j, "omega1": 2.0 + 0j,
            "omega_i1": 0.01 + 0j, "omega_i2": -0.01 + 0j,
        }
    )
    sweep: SweepAxis | None = None
    gammas: list = field(default_factory=list)
    area_points: int = 201
    vartheta_points: int = 201

    def two_level_params(self, **overrides) -> TwoLevelParams:
        vals = {**self.two_level, **overrides}
        return TwoLevelParams(
            kappa=_as_float(vals["kappa"]),
            gamma=_as_float(vals["gamma"]),
            omega1=complex(vals["omega1"]),
            omega2=complex(vals["omega2"]),
        )

    def four_level_params(self, **overrides) -> FourLevelParams:
        vals = {**self.four_level, **overrides}
        return FourLevelParams(
            kappa=_as_float(vals["kappa"]),
            gamma2=_as_float(vals["gamma2"]),
            gamma3=_as_float(vals["gamma3"]),
            delta2=_as_float(vals["delta2"]),
            delta3=_as_float(vals["delta3"]),
            omega0=complex(vals["omega0"]),
            omega1=complex(vals["omega1"]),
            omega_i=(complex(vals["omega_i1"]), complex(vals["omega_i2"])),
        )


def _as_float(value) -> float:
    if isinstance(value, complex):
        if value.imag != 0:
            raise ConfigError(f"expected a real number, got {value}")
        return value.real
    return float(value)


def _parse_complex(section: str, key: str, raw: str) -> complex:
    try:
        return complex(raw.replace(" ", ""))
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as a number") from exc


def _parse_float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as a real number") from exc


def _parse_int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} as an integer") from exc


_MODEL_SECTIONS = {"two-level": _TWO_LEVEL_KEYS, "four-level": _FOUR_LEVEL_KEYS}
_RUN_KEYS = (
    "model", "seed", "jobs", "out", "format", "n_runs", "vartheta",
    "failure_policy", "forced_p0", "alpha", "n_max", "gammas",
    "area_points", "vartheta_points",
)
_SWEEP_KEYS = ("axis", "min", "max", "points", "scale")


def load_config(
    path: str | None = None,
    overrides: list[str] | None = None,
    *,
    seed: int | None = None,
    out: str | None = None,
    jobs: int | None = None,
    default_model: str | None = None,
) -> RunConfig:
    """Parse the INI file plus --set overrides into a validated RunConfig."""
    parser = configparser.ConfigParser()
    if path is not None:
        if not os.path.exists(path):
            raise ConfigError(f"config file not found: {path}")
        parser.read(path)
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        section, key = section.strip(), key.strip()
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value.strip())

    cfg = RunConfig()
    if default_model is not None and not parser.has_option("run", "model"):
        cfg.model = default_model
    for section in parser.sections():
        if section == "run":
            _load_run_section(cfg, parser["run"])
        elif section in _MODEL_SECTIONS:
            _load_model_section(cfg, section, parser[section])
        elif section == "sweep":
            _load_sweep_section(cfg, parser["sweep"])
        else:
            raise ConfigError(f"unknown section [{section}]")

    if seed is not None:
        cfg.seed = seed
    elif not parser.has_option("run", "seed"):
        env = os.environ.get(SEED_ENV_VAR)
        if env is not None:
            cfg.seed = _parse_int("env", SEED_ENV_VAR, env)
    if out is not None:
        cfg.out = out
    if jobs is not None:
        cfg.jobs = jobs
    _validate_config(cfg)
    return cfg


def _load_run_section(cfg: RunConfig, section) -> None:
    for key in section:
        raw = section[key]
        if key not in _RUN_KEYS:
            raise ConfigError(f"[run] unknown key {key!r}")
        if key == "model":
            cfg.model = raw.strip()
        elif key == "seed":
            cfg.seed = _parse_int("run", key, raw)
        elif key == "jobs":
            cfg.jobs = _parse_int("run", key, raw)
        elif key == "out":
            cfg.out = raw.strip()
        elif key == "format":
            cfg.fmt = raw.strip()
        elif key == "n_runs":
            cfg.n_runs = _parse_int("run", key, raw)
        elif key == "vartheta":
            cfg.vartheta = _parse_float("run", key, raw)
        elif key == "failure_policy":
            cfg.failure_policy = raw.strip()
        elif key == "forced_p0":
            cfg.forced_p0 = _parse_float("run", key, raw)
        elif key == "alpha":
            cfg.alpha = _parse_complex("run", key, raw)
        elif key == "n_max":
            cfg.n_max = _parse_int("run", key, raw)
        elif key == "gammas":
            cfg.gammas = [_parse_float("run", key, v) for v in raw.split(",") if v.strip()]
        elif key == "area_points":
            cfg.area_points = _parse_int("run", key, raw)
        elif key == "vartheta_points":
            cfg.vartheta_points = _parse_int("run", key, raw)


def _load_model_section(cfg: RunConfig, section_name: str, section) -> None:
    store = cfg.two_level if section_name == "two-level" else cfg.four_level
    allowed = _MODEL_SECTIONS[section_name]
    for key in section:
        if key not in allowed:
            raise ConfigError(f"[{section_name}] unknown key {key!r}")
        store[key] = _parse_complex(section_name, key, section[key])


def _load_sweep_section(cfg: RunConfig, section) -> None:
    vals = {}
    for key in section:
        if key not in _SWEEP_KEYS:
            raise ConfigError(f"[sweep] unknown key {key!r}")
        vals[key] = section[key]
    if "axis" not in vals:
        raise ConfigError("[sweep] missing key 'axis'")
    cfg.sweep = SweepAxis(
        name=vals["axis"].strip(),
        min=_parse_float("sweep", "min", vals.get("min", "1e-3")),
        max=_parse_float("sweep", "max", vals.get("max", "1e-1")),
        points=_parse_int("sweep", "points", vals.get("points", "13")),
        scale=vals.get("scale", "log").strip(),
    )


def _validate_config(cfg: RunConfig) -> None:
    if cfg.model not in ("two-level", "four-level", "ideal"):
        raise ConfigError(f"[run] model: unknown model {cfg.model!r}")
    if cfg.fmt not in ("csv", "json"):
        raise ConfigError(f"[run] format: must be csv or json, got {cfg.fmt!r}")
    if cfg.failure_policy not in ("discard", "include_as_zero"):
        raise ConfigError(
            f"[run] failure_policy: must be discard or include_as_zero, got {cfg.failure_policy!r}"
        )
    if cfg.jobs < 1:
        raise ConfigError("[run] jobs: must be >= 1")
    if cfg.n_max < 0:
        raise ConfigError("[run] n_max: must be >= 0")
    if cfg.forced_p0 is not None and not 0.0 <= cfg.forced_p0 <= 1.0:
        raise ConfigError("[run] forced_p0: must lie in [0, 1]")
    if cfg.area_points < 2 or cfg.vartheta_points < 2:
        raise ConfigError("[run] area_points/vartheta_points: need >= 2 points")
    if cfg.sweep is not None:
        if cfg.sweep.points < 1:
            raise ConfigError("[sweep] points: must be >= 1")
        if cfg.sweep.scale not in ("log", "linear"):
            raise ConfigError(f"[sweep] scale: must be log or linear, got {cfg.sweep.scale!r}")
        if cfg.sweep.scale == "log" and cfg.sweep.min <= 0:
            raise ConfigError("[sweep] min: log scale needs min > 0")
        known = _TWO_LEVEL_KEYS if cfg.model == "two-level" else _FOUR_LEVEL_KEYS
        if cfg.sweep.name not in known:
            raise ConfigError(
                f"[sweep] axis: {cfg.sweep.name!r} is not a parameter of model {cfg.model}"
            )
    for val in cfg.gammas:
        if val < 0:
            raise ConfigError("[run] gammas: decay rates must be nonnegative")


# ---------------------------------------------------------------------------
# output helpers


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def _write_csv(path: str, header: list[str], rows: list[tuple]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if isinstance(v, float) else v for v in row])


def _map_points(fn, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        # map preserves input order, so output rows stay in grid order
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# commands


def _fig2_point(task: tuple[float, float, float, int]) -> tuple:
    omega1, gamma, kappa, n_max = task
    params = TwoLevelParams(
        kappa=kappa, gamma=gamma, omega1=omega1, omega2=-omega1
    )
    dims = HilbertDims(n_max=n_max, atom_levels=2, n_atoms=2)
    pulse = PulseSpec(duration=float(np.pi / abs(params.omega_minus)))
    res = prepare_two_level(params, pulse, dims)
    return (
        abs(omega1), gamma, kappa,
        res.p0, res.fidelity, abs(res.alpha_realized),
    )


def cmd_fig2(cfg: RunConfig) -> list[tuple]:
    """P0/fidelity grid of the two-level scheme with opposite-sign drives."""
    if cfg.model != "two-level":
        raise ConfigError("[run] model: fig2 needs model = two-level")
    sweep = cfg.sweep or SweepAxis("omega1", 1e-3, 1e-1, 13, "log")
    if sweep.name != "omega1":
        raise ConfigError("[sweep] axis: fig2 sweeps omega1")
    gammas = cfg.gammas or [0.0, 1e-3, 1e-2, 1e-1]
    kappa = _as_float(cfg.two_level["kappa"])
    tasks = [
        (float(om), float(g), kappa, cfg.n_max)
        for g in gammas
        for om in sweep.values()
    ]
    rows = _map_points(_fig2_point, tasks, cfg.jobs)
    if cfg.out:
        _write_csv(
            cfg.out,
            ["omega1_over_g", "gamma_over_g", "kappa_over_g", "p0", "fidelity", "alpha_abs"],
            rows,
        )
    return rows


def _fig6_point(task) -> tuple:
    drive, gamma, base, n_max = task
    params = FourLevelParams(
        kappa=base["kappa"], gamma2=gamma, gamma3=gamma,
        delta2=base["delta2"], delta3=base["delta3"],
        omega0=base["omega0"], omega1=base["omega1"],
        omega_i=(drive, -drive),
    )
    dims = HilbertDims(n_max=n_max, atom_levels=4, n_atoms=2)
    res = prepare_four_level(params, dims)
    return (abs(drive), gamma, res.p0, res.fidelity)


def cmd_fig6(cfg: RunConfig) -> list[tuple]:
    """P0/fidelity grid of the Raman scheme; both excited decay rates swept."""
    if cfg.model != "four-level":
        raise ConfigError("[run] model: fig6 needs model = four-level")
    # the default sweep stops at 0.05: beyond that the weak-drive hierarchy
    # degrades and the prepared state leaves the target family at the 1e-2
    # level, breaking the 99.5 percent fidelity floor the grid documents
    sweep = cfg.sweep or SweepAxis("omega_i1", 1e-3, 5e-2, 13, "log")
    if sweep.name != "omega_i1":
        raise ConfigError("[sweep] axis: fig6 sweeps omega_i1")
    gammas = cfg.gammas or [0.0, 0.1, 1.0]
    base = {
        "kappa": _as_float(cfg.four_level["kappa"]),
        "delta2": _as_float(cfg.four_level["delta2"]),
        "delta3": _as_float(cfg.four_level["delta3"]),
        "omega0": complex(cfg.four_level["omega0"]),
        "omega1": complex(cfg.four_level["omega1"]),
    }
    tasks = [
        (float(om), float(g), base, cfg.n_max)
        for g in gammas
        for om in sweep.values()
    ]
    rows = _map_points(_fig6_point, tasks, cfg.jobs)
    if cfg.out:
        _write_csv(
            cfg.out,
            ["omega_drive_over_g", "gamma_over_g", "p0", "fidelity"],
            rows,
        )
    return rows


def cmd_bell_surface(cfg: RunConfig) -> list[tuple]:
    """|B| on the (pulse area, angle step) grid."""
    scan = bell_surface(
        area_points=cfg.area_points, vartheta_points=cfg.vartheta_points
    )
    rows = [
        (float(scan.omega_minus_T[i]), float(scan.vartheta[j]), float(scan.b_s[i, j]))
        for i in range(scan.omega_minus_T.size)
        for j in range(scan.vartheta.size)
    ]
    if cfg.out:
        _write_csv(cfg.out, ["omega_minus_T", "vartheta", "b_s"], rows)
    return rows


REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "cavitybell pipeline report",
    "type": "object",
    "required": [
        "schema_version", "model", "seed", "n_runs", "failure_policy",
        "vartheta", "params", "p0", "alpha_realized", "correlations",
        "b_hat", "b_std_err",
    ],
    "properties": {
        "schema_version": {"const": 1},
        "model": {"enum": ["ideal", "two-level", "four-level"]},
        "seed": {"type": "integer"},
        "n_runs": {"type": "integer", "minimum": 100},
        "failure_policy": {"enum": ["discard", "include_as_zero"]},
        "vartheta": {"type": "number"},
        "params": {"type": "object"},
        "p0": {"type": "number", "minimum": 0, "maximum": 1},
        "alpha_realized": {
            "type": "object",
            "required": ["re", "im"],
            "properties": {"re": {"type": "number"}, "im": {"type": "number"}},
        },
        "correlations": {
            "type": "array",
            "minItems": 2,
            "maxItems": 2,
            "items": {
                "type": "object",
                "required": ["vartheta", "e_hat", "std_err", "n_runs", "n_discarded"],
                "properties": {
                    "vartheta": {"type": "number"},
                    "e_hat": {"type": "number", "minimum": -1, "maximum": 1},
                    "std_err": {"type": "number", "minimum": 0},
                    "n_runs": {"type": "integer"},
                    "n_discarded": {"type": "integer", "minimum": 0},
                },
            },
        },
        "b_hat": {"type": "number", "minimum": 0},
        "b_std_err": {"type": "number", "minimum": 0},
    },
}


def _complex_json(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def _pipeline_model(cfg: RunConfig):
    if cfg.model == "ideal":
        return IdealPreparation(alpha=cfg.alpha), {"alpha": _complex_json(cfg.alpha)}
    if cfg.model == "two-level":
        params = cfg.two_level_params()
        pulse = PulseSpec(duration=float(np.pi / abs(params.omega_minus)))
        payload = {
            "kappa": params.kappa, "gamma": params.gamma,
            "omega1": _complex_json(params.omega1),
            "omega2": _complex_json(params.omega2),
            "pulse_duration": pulse.duration,
        }
        return TwoLevelPreparation(params, pulse, n_max=cfg.n_max), payload
    params = cfg.four_level_params()
    payload = {
        "kappa": params.kappa, "gamma2": params.gamma2, "gamma3": params.gamma3,
        "delta2": params.delta2, "delta3": params.delta3,
        "omega0": _complex_json(params.omega0),
        "omega1": _complex_json(params.omega1),
        "omega_i1": _complex_json(params.omega_i[0]),
        "omega_i2": _complex_json(params.omega_i[1]),
        "pulse_duration": four_level_pulse_duration(params),
    }
    return FourLevelPreparation(params, n_max=cfg.n_max), payload


def cmd_pipeline(cfg: RunConfig) -> dict:
    """Full simulated experiment; returns (and optionally writes) the report."""
    import jsonschema

    if cfg.n_runs < 100:
        raise ConfigError("[run] n_runs: pipeline needs at least 100 runs")
    model, params_payload = _pipeline_model(cfg)
    pair = prepare_pair(model, forced_p0=cfg.forced_p0)
    est = estimate_bell(
        model, cfg.vartheta, cfg.n_runs, cfg.seed, cfg.failure_policy,
        forced_p0=cfg.forced_p0,
    )
    report = {
        "schema_version": 1,
        "model": cfg.model,
        "seed": cfg.seed,
        "n_runs": cfg.n_runs,
        "failure_policy": cfg.failure_policy,
        "vartheta": cfg.vartheta,
        "params": params_payload,
        "p0": pair.p0,
        "alpha_realized": _complex_json(pair.alpha_realized),
        "correlations": [
            {
                "vartheta": e.vartheta,
                "e_hat": e.e_hat,
                "std_err": e.std_err,
                "n_runs": e.n_runs,
                "n_discarded": e.n_discarded,
            }
            for e in (est.e_small, est.e_large)
        ],
        "b_hat": est.b_hat,
        "b_std_err": est.std_err,
    }
    jsonschema.validate(report, REPORT_SCHEMA)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


def cmd_validate(cfg: RunConfig, stream=None) -> int:
    """Print the working-regime report; exit status 1 if anything warns."""
    stream = stream if stream is not None else sys.stdout
    if cfg.model == "ideal":
        raise ConfigError("[run] model: validate needs two-level or four-level")
    params = (
        cfg.two_level_params() if cfg.model == "two-level" else cfg.four_level_params()
    )
    report = validate_regime(params)
    if cfg.fmt == "json":
        payload = [
            {
                "name": c.name, "ratio": c.ratio, "kind": c.kind,
                "threshold": c.threshold, "passed": c.passed,
            }
            for c in report.checks
        ]
        json.dump({"model": cfg.model, "checks": payload, "all_pass": report.all_pass},
                  stream, indent=2, sort_keys=True)
        stream.write("\n")
    else:
        for line in report.lines():
            stream.write(line + "\n")
    return EXIT_OK if report.all_pass else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# entry point


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cavitybell",
        description="entangled-pair preparation and Bell-test simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("fig2", "two-level preparation grid (CSV)"),
        ("fig6", "four-level preparation grid (CSV)"),
        ("bell-surface", "Bell statistic surface (CSV)"),
        ("pipeline", "simulated Bell experiment (JSON report)"),
        ("validate", "working-regime report"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", default=None, help="INI configuration file")
        p.add_argument("--out", default=None, help="output path")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--jobs", type=int, default=None,
                       help="worker processes for sweep points")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override a configuration value (repeatable)")
    return parser


_DEFAULT_MODELS = {"fig2": "two-level", "fig6": "four-level"}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(
            args.config,
            list(args.set),
            seed=args.seed,
            out=args.out,
            jobs=args.jobs,
            default_model=_DEFAULT_MODELS.get(args.command),
        )
        if args.command == "fig2":
            cmd_fig2(cfg)
        elif args.command == "fig6":
            cmd_fig6(cfg)
        elif args.command == "bell-surface":
            cmd_bell_surface(cfg)
        elif args.command == "pipeline":
            cmd_pipeline(cfg)
        elif args.command == "validate":
            return cmd_validate(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"numerical non-convergence: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

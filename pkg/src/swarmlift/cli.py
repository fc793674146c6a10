"""Operator entry point.

Four subcommands: ``simulate`` runs one scenario and writes its trace,
resolved header, and metrics summary; ``bench`` runs a benchmark matrix and
writes the aggregate table; ``validate`` schema-checks a configuration
without running any physics; ``presets`` lists the built-in scenarios in
machine-readable form.

Exit codes: 0 success, 2 configuration error (every violated key listed),
3 run failure (one-line diagnostic naming the failing tick).  The default
output root comes from the ``SWARMLIFT_OUT`` environment variable; flags
override the environment, and config values override built-in defaults.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, fields
from typing import Any, Sequence

import numpy as np

from .engine import run, run_matrix
from .errors import ConfigError, SwarmliftError
from .presets import MatrixEntry, fig5_matrix, preset, presets
from .scenario import ScenarioSpec, UniformLaw, load_scenario, validate_scenario
from .trace import write_aggregate, write_trace

log = logging.getLogger("swarmlift")

OUT_ENV_VAR = "SWARMLIFT_OUT"
DEFAULT_OUT = "runs"

CONTROLLER_CHOICES = ("dissipative", "formation", "leader")

# Units for the validate echo, keyed by ScenarioSpec field.
_UNITS: dict[str, str] = {
    "name": "label",
    "n_robots": "count",
    "robot_mass": "kg",
    "f_max": "N",
    "cable_length": "m",
    "cable_uncertainty": "m half-width",
    "payload_mass": "kg",
    "perception_range": "m",
    "h_c": "m (null = auto)",
    "controller": "name",
    "layout": "elevation/phase deg, payload_z m, jitter m",
    "waypoints": "m",
    "waypoints_absolute": "flag",
    "cruise_speed": "m/s",
    "ramp_accel": "m/s^2",
    "events": "time s",
    "wind": "mean m/s, gust_std m/s, correlation_time s",
    "seed": "integer",
    "duration": "s",
    "dt": "s",
    "settle_time": "s",
    "log_decimation": "physics steps per record",
    "control_decimation": "physics steps per control update",
    "escape_speed": "m/s",
    "leader_load_anchored": "flag",
    "initial_detached": "robot ids",
    "gains": "k_* N/m, c_*/f_c N*s/m",
    "pd_gains": "k_p 1/s^2, k_v 1/s, clamp m/s^2",
    "baseline_gains": "k_p 1/s^2, k_v 1/s, k_edge N/m, c_edge N*s/m",
}


@dataclass
class CliConfig:
    """Parsed command line: one record per invocation."""

    subcommand: str
    config: str | None = None
    preset: str | None = None
    out: str | None = None
    seed: int | None = None
    repeats: int = 10
    controller: str | None = None
    controllers: str | None = None
    seed_base: int | None = None
    workers: int | None = None
    traces: bool = False
    strict: bool = False
    log_level: str = "warning"


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------
def _out_dir(cfg: CliConfig) -> str:
    """Output root: flag beats environment beats built-in default."""
    if cfg.out is not None:
        return cfg.out
    return os.environ.get(OUT_ENV_VAR, DEFAULT_OUT)


def _load_spec(cfg: CliConfig) -> ScenarioSpec:
    """Resolve the scenario from --preset or --config, applying overrides."""
    if cfg.config is not None and cfg.preset is not None:
        raise ConfigError(["give either --preset or --config, not both"])
    if cfg.config is not None:
        spec = load_scenario(cfg.config)
    elif cfg.preset is not None:
        spec = preset(cfg.preset)
    else:
        raise ConfigError(["one of --preset or --config is required"])
    if cfg.controller is not None:
        spec.controller = cfg.controller
    if cfg.seed is not None:
        spec.seed = cfg.seed
    violations = validate_scenario(spec)
    if violations:
        raise ConfigError(violations)
    return spec


def _fail(exc: SwarmliftError, code: int) -> int:
    print(f"error: {exc}", file=sys.stderr)
    return code


def _spec_echo_lines(spec: ScenarioSpec) -> list[str]:
    """Resolved configuration echo: every field, its value, and its unit."""
    lines = []
    for f in fields(spec):
        value = getattr(spec, f.name)
        if f.name == "layout":
            shown: Any = {
                "elevation_deg": value.elevation_deg,
                "phase_deg": value.phase_deg,
                "payload_z": value.payload_z,
                "jitter": value.jitter,
            }
        elif f.name == "events":
            shown = [
                {"time": ev.time, "kind": ev.kind, "robot_id": ev.robot_id}
                for ev in value
            ]
        elif isinstance(value, UniformLaw):
            shown = {"law": "uniform", "low": value.low, "high": value.high}
        else:
            shown = value
        unit = _UNITS.get(f.name, "")
        lines.append(f"  {f.name:<20} = {shown!r:<40} [{unit}]")
    return lines


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------
def cmd_simulate(cfg: CliConfig) -> int:
    """Run one scenario; write trace, resolved header, metrics summary."""
    try:
        spec = _load_spec(cfg)
    except ConfigError as exc:
        return _fail(exc, 2)
    out = _out_dir(cfg)
    os.makedirs(out, exist_ok=True)
    try:
        result = run(spec)
    except ConfigError as exc:
        return _fail(exc, 2)
    except SwarmliftError as exc:
        return _fail(exc, 3)
    stem = f"{spec.name}-seed{spec.seed}"
    trace_path = os.path.join(out, f"{stem}.ndjson.gz")
    write_trace(trace_path, result.header, result.records)
    metrics_path = os.path.join(out, f"{stem}.metrics.json")
    if result.metrics is not None:
        summary = result.metrics.summary_dict()
        with open(metrics_path, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {trace_path} ({len(result.records)} records)")
        print(f"wrote {metrics_path}")
        print(
            "tracking median = "
            f"{summary['tracking']['median']:.4f} m, "
            f"convergence = {summary['convergence_time']} s"
        )
    else:
        print(f"wrote {trace_path} ({len(result.records)} records)")
    return 0


def _bench_entries(cfg: CliConfig) -> list[MatrixEntry]:
    controllers = tuple(
        c.strip() for c in (cfg.controllers or ",".join(CONTROLLER_CHOICES)
                            ).split(",") if c.strip()
    )
    for c in controllers:
        if c not in CONTROLLER_CHOICES:
            raise ConfigError(
                [f"unknown controller {c!r}; valid: "
                 f"{', '.join(CONTROLLER_CHOICES)}"]
            )
    if cfg.repeats < 1:
        raise ConfigError([f"repeats must be >= 1, got {cfg.repeats}"])
    names = cfg.preset or "fig5"
    if names == "fig5":
        return fig5_matrix(repeats=cfg.repeats, controllers=controllers)
    entries = []
    for name in names.split(","):
        name = name.strip()
        preset(name)  # raises ConfigError on unknown names
        entries.extend(
            MatrixEntry(preset=name, controller=c, repeats=cfg.repeats)
            for c in controllers
        )
    return entries


def cmd_bench(cfg: CliConfig) -> int:
    """Run the benchmark matrix; write the aggregate, print the comparison."""
    try:
        entries = _bench_entries(cfg)
    except ConfigError as exc:
        return _fail(exc, 2)
    out = _out_dir(cfg)
    os.makedirs(out, exist_ok=True)
    trace_dir = None
    if cfg.traces:
        trace_dir = os.path.join(out, "traces")
        os.makedirs(trace_dir, exist_ok=True)
    log.info("running %d matrix cells", sum(e.repeats for e in entries))
    rows = run_matrix(
        entries, seed_base=cfg.seed_base, workers=cfg.workers,
        trace_dir=trace_dir,
    )
    agg_path = os.path.join(out, "aggregate.csv")
    write_aggregate(agg_path, rows)

    scenarios = list(dict.fromkeys(r["scenario"] for r in rows))
    controllers = list(dict.fromkeys(r["controller"] for r in rows))
    header = "scenario".ljust(18) + "".join(c.rjust(14) for c in controllers)
    print(header)
    for sc in scenarios:
        cells = []
        for ctrl in controllers:
            vals = [
                float(r["tracking_median"]) for r in rows
                if r["scenario"] == sc and r["controller"] == ctrl
                and r["status"] == "ok"
            ]
            cells.append(f"{np.median(vals):14.4f}" if vals else "failed".rjust(14))
        print(sc.ljust(18) + "".join(cells))
    print(f"wrote {agg_path} ({len(rows)} rows)")

    failures = sum(1 for r in rows if r["status"] != "ok")
    if failures:
        print(f"warning: {failures}/{len(rows)} cells failed", file=sys.stderr)
        if cfg.strict:
            return 3
    return 0


def cmd_validate(cfg: CliConfig) -> int:
    """Schema-check a config and echo the resolved values; no physics."""
    try:
        spec = _load_spec(cfg)
    except ConfigError as exc:
        for violation in exc.violations:
            print(f"invalid: {violation}", file=sys.stderr)
        return 2
    print(f"scenario {spec.name!r} is valid")
    print("resolved configuration (value [unit]):")
    for line in _spec_echo_lines(spec):
        print(line)
    return 0


def cmd_presets(cfg: CliConfig) -> int:
    """Machine-readable preset list on standard output."""
    table = presets()
    out = []
    for name in sorted(table):
        spec = table[name]
        fm = spec.f_max
        out.append({
            "name": name,
            "controller": spec.controller,
            "n_robots": spec.n_robots,
            "payload_mass": spec.payload_mass,
            "cable_length": spec.cable_length,
            "cable_uncertainty": spec.cable_uncertainty,
            "f_max": (
                {"law": "uniform", "low": fm.low, "high": fm.high}
                if isinstance(fm, UniformLaw) else fm
            ),
            "perception_range": spec.perception_range,
            "wind": spec.wind if isinstance(spec.wind, str) else "custom",
            "duration": spec.duration,
            "events": len(spec.events),
            "seed": spec.seed,
        })
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarmlift",
        description="Cooperative aerial transport simulator and benchmark "
                    "harness.",
    )
    parser.add_argument(
        "--log-level", default="warning",
        choices=("debug", "info", "warning", "error"),
        help="logging verbosity (default: warning)",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_scenario_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--preset", help="built-in scenario name")
        p.add_argument("--config", help="scenario config file (YAML/JSON)")
        p.add_argument("--controller", choices=CONTROLLER_CHOICES,
                       help="override the scenario's controller")
        p.add_argument("--seed", type=int, help="override the scenario seed")

    p_sim = sub.add_parser("simulate", help="run one scenario")
    add_scenario_flags(p_sim)
    p_sim.add_argument("--out", help=f"output directory (default: "
                                     f"${OUT_ENV_VAR} or {DEFAULT_OUT}/)")

    p_bench = sub.add_parser("bench", help="run a benchmark matrix")
    p_bench.add_argument("--preset", default="fig5",
                         help="'fig5' for the full grid, or comma-separated "
                              "preset names (default: fig5)")
    p_bench.add_argument("--controllers",
                         help="comma-separated controller subset "
                              f"(default: {','.join(CONTROLLER_CHOICES)})")
    p_bench.add_argument("--repeats", type=int, default=10,
                         help="seeded repeats per cell (default: 10)")
    p_bench.add_argument("--seed-base", type=int, dest="seed_base",
                         help="first repeat seed (default: each preset's "
                              "own seed)")
    p_bench.add_argument("--workers", type=int,
                         help="worker processes (default: available "
                              "parallelism)")
    p_bench.add_argument("--traces", action="store_true",
                         help="also write one trace file per cell")
    p_bench.add_argument("--strict", action="store_true",
                         help="exit 3 if any cell fails")
    p_bench.add_argument("--out", help=f"output directory (default: "
                                       f"${OUT_ENV_VAR} or {DEFAULT_OUT}/)")

    p_val = sub.add_parser("validate", help="schema-check a scenario config")
    add_scenario_flags(p_val)

    sub.add_parser("presets", help="list built-in scenarios as JSON")
    return parser


_COMMANDS = {
    "simulate": cmd_simulate,
    "bench": cmd_bench,
    "validate": cmd_validate,
    "presets": cmd_presets,
}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    kwargs = {
        f.name: getattr(args, f.name)
        for f in fields(CliConfig) if hasattr(args, f.name)
    }
    cfg = CliConfig(**kwargs)
    logging.basicConfig(level=cfg.log_level.upper())
    return _COMMANDS[cfg.subcommand](cfg)


if __name__ == "__main__":
    raise SystemExit(main())

"""Fixtures that synthesize trace/aggregate files in the documented formats.

Everything is written by hand here — the plotting package must work from
files alone, so the tests build those files alone.
"""
from __future__ import annotations

import gzip
import json
import math
from pathlib import Path

import pytest

META = {"format": "swarmlift-trace", "schema_version": 1}

AGGREGATE_COLUMNS = (
    "scenario",
    "controller",
    "seed",
    "repeat",
    "status",
    "tracking_median",
    "tracking_mean",
    "tracking_max",
    "tracking_iqr",
    "tension_imbalance",
    "convergence_time",
    "steady_hull_residual",
    "steady_combination_error",
    "final_energy",
    "error",
)


def synth_records(n_robots: int = 4, steps: int = 60, drop_robot: int | None = None,
                  drop_time: float = 1.0) -> list[dict]:
    """A plausible hover trace: mild oscillation, one optional tension drop."""
    records = []
    for k in range(steps):
        t = 0.05 * k
        tension = []
        for rid in range(n_robots):
            mag = 5.0 + 0.3 * math.sin(2.0 * t + rid)
            if drop_robot == rid and t > drop_time:
                mag = 0.0
            tension.append([0.0, 0.0, -mag])
        records.append(
            {
                "t": t,
                "p": [
                    [math.cos(2 * math.pi * r / n_robots),
                     math.sin(2 * math.pi * r / n_robots),
                     2.0 + 0.01 * math.sin(t + r)]
                    for r in range(n_robots)
                ],
                "v": [[0.01 * math.cos(t + r), 0.0, 0.0]
                      for r in range(n_robots)],
                "tension": tension,
                "payload": {
                    "p": [0.0, 0.0, 1.0 + 0.02 * math.sin(t)],
                    "v": [0.0, 0.0, 0.02 * math.cos(t)],
                },
            }
        )
    return records


def write_trace_file(path: Path, records: list[dict], meta: dict | None = None,
                     header: dict | None = None) -> Path:
    lines = [json.dumps(META if meta is None else meta, sort_keys=True)]
    lines += [json.dumps(rec, sort_keys=True) for rec in records]
    text = "\n".join(lines) + "\n"
    if path.suffix == ".gz":
        with gzip.open(path, "wt", encoding="utf-8") as fh:
            fh.write(text)
    else:
        path.write_text(text, encoding="utf-8")
    if header is not None:
        stem = path.name
        for suffix in (".gz", ".ndjson"):
            if stem.endswith(suffix):
                stem = stem[: -len(suffix)]
        sidecar = path.with_name(stem + ".header.json")
        sidecar.write_text(json.dumps(header, sort_keys=True), encoding="utf-8")
    return path


def default_header(n_robots: int = 4, events: list[dict] | None = None) -> dict:
    return {
        "masses": [1.0] * n_robots,
        "payload_mass": 4.0,
        "events": events or [],
    }


def write_aggregate_file(path: Path, scenarios=("cell-a", "cell-b", "cell-c",
                                                "cell-d"),
                         controllers=("dissipative", "formation", "leader"),
                         seeds: int = 10, status: str = "ok") -> Path:
    rows = [",".join(AGGREGATE_COLUMNS)]
    for scn_i, scenario in enumerate(scenarios):
        for ctl_i, controller in enumerate(controllers):
            for seed in range(seeds):
                err = 0.3 + 0.2 * ctl_i + 0.05 * scn_i + 0.01 * seed
                if status == "ok":
                    rows.append(
                        f"{scenario},{controller},{seed},{seed},ok,"
                        f"{err},{err + 0.05},{err + 0.4},{0.1},"
                        f"{0.2},{3.5},{0.001},{0.002},{1.5},"
                    )
                else:
                    rows.append(
                        f"{scenario},{controller},{seed},{seed},error,"
                        ",,,,,,,,,boom"
                    )
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def trace_file(tmp_path):
    return write_trace_file(
        tmp_path / "hover-seed1.ndjson.gz",
        synth_records(),
        header=default_header(),
    )


@pytest.fixture
def unplug_trace_file(tmp_path):
    return write_trace_file(
        tmp_path / "unplug-seed7.ndjson.gz",
        synth_records(drop_robot=2, drop_time=1.0),
        header=default_header(events=[{"time": 1.0, "kind": "unplug",
                                       "robot_id": 2}]),
    )


@pytest.fixture
def aggregate_file(tmp_path):
    return write_aggregate_file(tmp_path / "aggregate.csv")

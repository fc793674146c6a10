"""Readers for the documented trace and aggregate file formats.

These parsers are intentionally independent of the simulator package: the
file formats are the contract. A trace is newline-delimited JSON whose
first line is a meta object ``{"format": "swarmlift-trace",
"schema_version": 1}``; an aggregate is a CSV with a fixed column order.
"""
from __future__ import annotations

import csv
import gzip
import json
from pathlib import Path
from typing import Any

EXPECTED_SCHEMA_VERSION = 1
EXPECTED_FORMAT = "swarmlift-trace"

# Column order of the benchmark aggregate CSV.
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

_FLOAT_COLUMNS = (
    "tracking_median",
    "tracking_mean",
    "tracking_max",
    "tracking_iqr",
    "tension_imbalance",
    "convergence_time",
    "steady_hull_residual",
    "steady_combination_error",
    "final_energy",
)


class SchemaMismatch(Exception):
    """Input file does not match the format this reader supports."""


class EmptyInput(Exception):
    """Input file parses but carries no data to plot."""


def _open_text(path: Path):
    if path.suffix == ".gz":
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, "r", encoding="utf-8")


def read_trace(path: Path | str) -> tuple[dict[str, Any], list[dict[str, Any]]]:
    """Parse one trace file; returns (meta, records).

    Raises SchemaMismatch naming the expected schema version when the meta
    line does not match, and EmptyInput when the trace has no records.
    """
    path = Path(path)
    with _open_text(path) as fh:
        first = fh.readline()
        if not first.strip():
            raise SchemaMismatch(
                f"{path}: empty file, expected a meta line with format "
                f"{EXPECTED_FORMAT!r} schema_version {EXPECTED_SCHEMA_VERSION}"
            )
        try:
            meta = json.loads(first)
        except json.JSONDecodeError as exc:
            raise SchemaMismatch(
                f"{path}: first line is not JSON ({exc}); expected format "
                f"{EXPECTED_FORMAT!r} schema_version {EXPECTED_SCHEMA_VERSION}"
            ) from exc
        if (
            not isinstance(meta, dict)
            or meta.get("format") != EXPECTED_FORMAT
            or meta.get("schema_version") != EXPECTED_SCHEMA_VERSION
        ):
            raise SchemaMismatch(
                f"{path}: meta line {meta!r} does not match format "
                f"{EXPECTED_FORMAT!r} schema_version {EXPECTED_SCHEMA_VERSION}"
            )
        records = [json.loads(line) for line in fh if line.strip()]
    if not records:
        raise EmptyInput(f"{path}: trace has a valid meta line but no records")
    return meta, records


def header_path_for(trace_path: Path | str) -> Path:
    """Sidecar header path for a trace: strip .gz/.ndjson, add .header.json."""
    path = Path(trace_path)
    stem = path.name
    for suffix in (".gz", ".ndjson"):
        if stem.endswith(suffix):
            stem = stem[: -len(suffix)]
    return path.with_name(stem + ".header.json")


def read_header(trace_path: Path | str) -> dict[str, Any] | None:
    """Load the resolved-scenario sidecar if present (None if absent)."""
    sidecar = header_path_for(trace_path)
    if not sidecar.exists():
        return None
    with open(sidecar, "r", encoding="utf-8") as fh:
        return json.load(fh)


def read_aggregate(path: Path | str) -> list[dict[str, Any]]:
    """Parse a benchmark aggregate CSV into typed row dicts.

    Raises SchemaMismatch on a column-order mismatch and EmptyInput when
    the table holds no rows.
    """
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            head = next(reader)
        except StopIteration:
            raise SchemaMismatch(
                f"{path}: empty file, expected header columns "
                f"{list(AGGREGATE_COLUMNS)} (aggregate schema version "
                f"{EXPECTED_SCHEMA_VERSION})"
            ) from None
        if tuple(head) != AGGREGATE_COLUMNS:
            raise SchemaMismatch(
                f"{path}: columns {head} do not match the supported "
                f"aggregate schema version {EXPECTED_SCHEMA_VERSION} "
                f"columns {list(AGGREGATE_COLUMNS)}"
            )
        rows = []
        for raw in reader:
            row: dict[str, Any] = dict(zip(AGGREGATE_COLUMNS, raw))
            for key in _FLOAT_COLUMNS:
                row[key] = float(row[key]) if row[key] != "" else None
            row["seed"] = int(row["seed"])
            row["repeat"] = int(row["repeat"])
            rows.append(row)
    if not rows:
        raise EmptyInput(f"{path}: aggregate has a header but no rows")
    return rows

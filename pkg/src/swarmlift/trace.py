"""Trace and aggregate file I/O.

A run produces two artifacts:

* a *trace* file — newline-delimited JSON. The first line is a meta object
  carrying the schema version; every following line is one snapshot record
  with self-describing field names. Keys are sorted and floats use their
  shortest round-trip representation, so identical runs produce identical
  bytes. Files ending in ``.gz`` are gzip-compressed with a zeroed
  timestamp, keeping the compressed bytes deterministic too.
* a *header* sidecar — a JSON document holding the fully resolved scenario
  (including every drawn sample, locked rest lengths, and gains) so any
  result can be reproduced from its own artifacts.

Benchmark matrices emit an *aggregate* — a CSV table with one row per
(scenario, controller, repeat) cell in the documented column order
:data:`AGGREGATE_COLUMNS`.
"""
from __future__ import annotations

import csv
import gzip
import io
import json
import math
from pathlib import Path
from typing import Any, Iterable

from .errors import SchemaMismatch

SCHEMA_VERSION = 1

FORMAT_NAME = "swarmlift-trace"

# Column order of the aggregate CSV. Float cells use shortest round-trip
# repr; absent values (e.g. convergence never reached) are empty strings.
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


# ---------------------------------------------------------------------------
# JSON canonicalization
# ---------------------------------------------------------------------------
def _canonical_dumps(obj: Any) -> str:
    """Serialize with sorted keys and no whitespace variation."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"),
                      allow_nan=True)


def serialize_record(record: dict) -> str:
    """One trace record as its canonical single-line JSON form."""
    return _canonical_dumps(record)


def meta_line() -> str:
    return _canonical_dumps(
        {"format": FORMAT_NAME, "schema_version": SCHEMA_VERSION}
    )


def serialize_trace(records: Iterable[dict]) -> str:
    """Full trace body: meta line, then one line per record."""
    lines = [meta_line()]
    lines.extend(serialize_record(r) for r in records)
    return "\n".join(lines) + "\n"


def deserialize_trace(text: str) -> list[dict]:
    """Parse a trace body; verifies the meta line and schema version."""
    lines = text.splitlines()
    if not lines:
        raise SchemaMismatch("empty trace file (missing meta line)")
    meta = json.loads(lines[0])
    if not isinstance(meta, dict) or meta.get("format") != FORMAT_NAME:
        raise SchemaMismatch("first line is not a trace meta object")
    version = meta.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"unsupported trace schema version {version!r} "
            f"(this reader supports {SCHEMA_VERSION})"
        )
    return [json.loads(line) for line in lines[1:]]


# ---------------------------------------------------------------------------
# File I/O (transparent gzip by suffix)
# ---------------------------------------------------------------------------
def _write_text(path: Path, text: str) -> None:
    data = text.encode("utf-8")
    if path.suffix == ".gz":
        buf = io.BytesIO()
        # mtime=0 and no embedded filename keep the gzip bytes reproducible.
        with gzip.GzipFile(fileobj=buf, mode="wb", mtime=0) as zf:
            zf.write(data)
        path.write_bytes(buf.getvalue())
    else:
        path.write_bytes(data)


def _read_text(path: Path) -> str:
    if path.suffix == ".gz":
        return gzip.decompress(path.read_bytes()).decode("utf-8")
    return path.read_bytes().decode("utf-8")


def header_path_for(trace_path: Path | str) -> Path:
    """Sidecar location: strip .gz/.ndjson, append .header.json."""
    p = Path(trace_path)
    name = p.name
    for suffix in (".gz", ".ndjson"):
        if name.endswith(suffix):
            name = name[: -len(suffix)]
    return p.with_name(name + ".header.json")


def write_trace(
    trace_path: Path | str, header: dict, records: Iterable[dict]
) -> tuple[Path, Path]:
    """Write trace + header sidecar; returns (trace_path, header_path)."""
    trace_path = Path(trace_path)
    trace_path.parent.mkdir(parents=True, exist_ok=True)
    _write_text(trace_path, serialize_trace(records))
    hpath = header_path_for(trace_path)
    _write_text(
        hpath,
        json.dumps(
            {"format": FORMAT_NAME, "schema_version": SCHEMA_VERSION,
             "header": header},
            sort_keys=True,
            indent=2,
        )
        + "\n",
    )
    return trace_path, hpath


def read_trace(trace_path: Path | str) -> tuple[dict, list[dict]]:
    """Read (header, records) for a trace file written by write_trace."""
    trace_path = Path(trace_path)
    records = deserialize_trace(_read_text(trace_path))
    doc = json.loads(_read_text(header_path_for(trace_path)))
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise SchemaMismatch(
            f"unsupported header schema version {doc.get('schema_version')!r}"
        )
    return doc["header"], records


# ---------------------------------------------------------------------------
# Aggregate CSV
# ---------------------------------------------------------------------------
def _format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def write_aggregate(path: Path | str, rows: Iterable[dict]) -> Path:
    """Write aggregate rows (dicts keyed by AGGREGATE_COLUMNS) as CSV."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(AGGREGATE_COLUMNS)
    for row in rows:
        unknown = set(row) - set(AGGREGATE_COLUMNS)
        if unknown:
            raise ValueError(f"unknown aggregate columns: {sorted(unknown)}")
        writer.writerow([_format_cell(row.get(c)) for c in AGGREGATE_COLUMNS])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def read_aggregate(path: Path | str) -> list[dict]:
    """Read an aggregate CSV back into typed row dicts."""
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise SchemaMismatch("empty aggregate file (missing column header)")
    if tuple(rows[0]) != AGGREGATE_COLUMNS:
        raise SchemaMismatch(
            f"aggregate columns {rows[0]!r} do not match the documented order"
        )
    out = []
    numeric = {
        "tracking_median", "tracking_mean", "tracking_max", "tracking_iqr",
        "tension_imbalance", "convergence_time", "steady_hull_residual",
        "steady_combination_error", "final_energy",
    }
    integral = {"seed", "repeat"}
    for raw in rows[1:]:
        row: dict[str, Any] = {}
        for key, cell in zip(AGGREGATE_COLUMNS, raw):
            if key in numeric:
                row[key] = float(cell) if cell else None
            elif key in integral:
                row[key] = int(cell) if cell else None
            else:
                row[key] = cell
        out.append(row)
    return out

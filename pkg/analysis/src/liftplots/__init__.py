"""Offline figure generation from simulator trace and aggregate files.

This package is a strict file-format consumer: it renders figures from the
documented newline-delimited-JSON trace format and the benchmark aggregate
CSV, and never imports the simulator. Rendering is deterministic — the
same job produces byte-identical PNG and SVG output.
"""
from .io import (
    AGGREGATE_COLUMNS,
    EXPECTED_SCHEMA_VERSION,
    EmptyInput,
    SchemaMismatch,
    read_aggregate,
    read_trace,
)
from .plots import KINDS, PlotJob, render

__version__ = "0.1.0"

__all__ = [
    "AGGREGATE_COLUMNS",
    "EXPECTED_SCHEMA_VERSION",
    "EmptyInput",
    "KINDS",
    "PlotJob",
    "SchemaMismatch",
    "read_aggregate",
    "read_trace",
    "render",
    "__version__",
]

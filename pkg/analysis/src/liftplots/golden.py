"""Committed reference artifacts used by regeneration checks."""
from __future__ import annotations

from pathlib import Path


def golden_dir() -> Path:
    """Directory of committed golden traces and aggregates."""
    return Path(__file__).parent / "golden"

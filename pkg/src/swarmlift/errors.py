"""Exception types shared across the simulator."""
from __future__ import annotations


class SwarmliftError(Exception):
    """Base class for all simulator errors."""


class ConfigError(SwarmliftError):
    """Scenario configuration is invalid.

    Carries the full list of violations so a validator can report every
    offending key at once.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DegenerateAltitude(SwarmliftError):
    """Robot and payload altitudes coincide; the node ray is undefined."""


class CoincidentPoints(SwarmliftError):
    """Two points expected to be distinct coincide (within guard epsilon)."""


class CoincidentNodes(CoincidentPoints):
    """Two virtual nodes coincide at formation lock."""


class InvalidSample(SwarmliftError):
    """A drawn scenario sample is physically unusable (e.g. cable too short)."""


class EventTargetMissing(SwarmliftError):
    """A timed event names a robot that does not exist (or is already gone)."""


class MissingTemplate(SwarmliftError):
    """A baseline controller was given a template sized for a different n."""


class EmptyTrace(SwarmliftError):
    """A metric was asked to summarize a trace with no records."""


class DegenerateHull(SwarmliftError):
    """Fewer than three distinct node projections; the hull has no interior."""


class NumericalBlowup(SwarmliftError):
    """Any state magnitude exceeded the guard bound during integration."""

    def __init__(self, tick: int, what: str):
        self.tick = tick
        self.what = what
        super().__init__(f"state magnitude guard tripped at tick {tick}: {what}")


class SchemaMismatch(SwarmliftError):
    """A trace or aggregate file declares an unsupported schema version."""

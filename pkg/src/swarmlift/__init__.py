"""Deterministic simulator and benchmark harness for communication-free
cooperative aerial transport of cable-suspended payloads."""
from __future__ import annotations

from .baselines import (
    BaselineGains,
    FormationTemplate,
    formation_based_control,
    payload_leader_control,
    ring_template,
)
from .control import (
    LocalObservation,
    PDGains,
    acceleration_command,
    dissipative_control,
    invariant_set_residual,
    rest_lengths_init,
)
from .dynamics import CableModel, WindModel, WorldParams, cable_tension, step
from .engine import RunResult, run, run_matrix
from .errors import (
    ConfigError,
    DegenerateAltitude,
    DegenerateHull,
    EmptyTrace,
    NumericalBlowup,
    SchemaMismatch,
    SwarmliftError,
)
from .metrics import (
    RunMetrics,
    compute_metrics,
    convex_hull_residual,
    energy_ledger,
    tension_stats,
    tracking_error,
)
from .model import (
    ConnectivityMatrix,
    ControllerParams,
    FormationCenter,
    PayloadState,
    RobotState,
    VirtualNode,
    connectivity,
    lever_ratio,
    virtual_node_position,
    virtual_node_velocity,
)
from .presets import MatrixEntry, fig5_matrix, preset, presets
from .scenario import (
    JoinSpec,
    LayoutSpec,
    ReferenceTrajectory,
    ScenarioInstance,
    ScenarioSpec,
    TimedEvent,
    UniformLaw,
    load_scenario,
    sample_instance,
    scenario_from_dict,
    validate_scenario,
)
from .trace import (
    AGGREGATE_COLUMNS,
    SCHEMA_VERSION,
    read_aggregate,
    read_trace,
    write_aggregate,
    write_trace,
)

__version__ = "0.1.0"

__all__ = [
    "AGGREGATE_COLUMNS",
    "BaselineGains",
    "CableModel",
    "ConfigError",
    "ConnectivityMatrix",
    "ControllerParams",
    "DegenerateAltitude",
    "DegenerateHull",
    "EmptyTrace",
    "FormationCenter",
    "FormationTemplate",
    "JoinSpec",
    "LayoutSpec",
    "LocalObservation",
    "MatrixEntry",
    "NumericalBlowup",
    "PDGains",
    "PayloadState",
    "ReferenceTrajectory",
    "RobotState",
    "RunMetrics",
    "RunResult",
    "ScenarioInstance",
    "ScenarioSpec",
    "SchemaMismatch",
    "SwarmliftError",
    "TimedEvent",
    "UniformLaw",
    "VirtualNode",
    "WindModel",
    "WorldParams",
    "acceleration_command",
    "cable_tension",
    "compute_metrics",
    "connectivity",
    "convex_hull_residual",
    "dissipative_control",
    "energy_ledger",
    "fig5_matrix",
    "formation_based_control",
    "invariant_set_residual",
    "lever_ratio",
    "load_scenario",
    "payload_leader_control",
    "preset",
    "presets",
    "read_aggregate",
    "read_trace",
    "rest_lengths_init",
    "ring_template",
    "run",
    "run_matrix",
    "sample_instance",
    "scenario_from_dict",
    "SCHEMA_VERSION",
    "step",
    "tension_stats",
    "tracking_error",
    "validate_scenario",
    "virtual_node_position",
    "virtual_node_velocity",
    "write_aggregate",
    "write_trace",
]

"""Named scenario presets: canonical experiments and benchmark matrix cells."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError
from .scenario import LayoutSpec, ScenarioSpec, TimedEvent, UniformLaw


def _hover4(name: str = "hover4") -> ScenarioSpec:
    """Four homogeneous robots, 4 kg payload, 2 m cables, stationary
    reference, no wind; the convergence/dissipation reference case."""
    return ScenarioSpec(
        name=name,
        n_robots=4,
        robot_mass=1.0,
        f_max=35.0,
        cable_length=2.0,
        cable_uncertainty=0.0,
        payload_mass=4.0,
        perception_range=8.0,
        controller="dissipative",
        layout=LayoutSpec(elevation_deg=45.0, payload_z=1.0, jitter=0.0),
        waypoints=[[0.0, 0.0, 0.0]],
        wind="calm",
        seed=42,
        duration=60.0,
        settle_time=10.0,
    )


def _nominal4() -> ScenarioSpec:
    """Short 3 m mission used for one-time controller/baseline calibration."""
    spec = _hover4("nominal4")
    spec.waypoints = [[0.0, 0.0, 0.0], [3.0, 0.0, 0.0]]
    spec.cruise_speed = 0.5
    spec.duration = 30.0
    return spec


def _fig5_base(name: str) -> ScenarioSpec:
    """Common cell: 10 robots, 2.02 m cables, 15 m mission in gusty wind."""
    return ScenarioSpec(
        name=name,
        n_robots=10,
        robot_mass=1.0,
        f_max=25.0,
        cable_length=2.02,
        cable_uncertainty=0.0,
        payload_mass=5.0,
        perception_range=8.0,
        controller="dissipative",
        layout=LayoutSpec(elevation_deg=30.0, payload_z=1.0, jitter=0.05),
        waypoints=[[0.0, 0.0, 0.0], [15.0, 0.0, 0.0]],
        cruise_speed=1.2,
        ramp_accel=0.5,
        wind="gusty",
        seed=0,
        duration=30.0,
        settle_time=5.0,
    )


def _fig6_unplug() -> ScenarioSpec:
    spec = _hover4("fig6-unplug40s")
    spec.duration = 80.0
    spec.seed = 7
    spec.events = [TimedEvent(time=40.0, kind="unplug", robot_id=2)]
    return spec


def _firewall4() -> ScenarioSpec:
    """Hover case plus a detached bystander used by locality twin runs.

    Logged at full physics rate so twin runs can compare every command."""
    spec = _hover4("firewall4")
    spec.n_robots = 5
    spec.initial_detached = [4]
    spec.duration = 6.0
    spec.settle_time = 2.0
    spec.log_decimation = 1
    return spec


def _five_robot() -> ScenarioSpec:
    return ScenarioSpec(
        name="five-robot-5kg",
        n_robots=5,
        robot_mass=1.0,
        f_max=30.0,
        cable_length=2.0,
        payload_mass=5.0,
        perception_range=8.0,
        controller="dissipative",
        layout=LayoutSpec(elevation_deg=45.0, payload_z=1.0, jitter=0.0),
        waypoints=[[0.0, 0.0, 0.0], [34.0, 0.0, 5.0]],
        cruise_speed=1.0,
        ramp_accel=0.5,
        wind="calm",
        seed=3,
        duration=60.0,
        settle_time=10.0,
    )


def _scale100() -> ScenarioSpec:
    return ScenarioSpec(
        name="scale100",
        n_robots=100,
        robot_mass=1.0,
        f_max=35.0,
        cable_length=5.0,
        payload_mass=100.0,
        perception_range=8.0,
        controller="dissipative",
        layout=LayoutSpec(elevation_deg=30.0, payload_z=1.0, jitter=0.0),
        waypoints=[[0.0, 0.0, 0.0]],
        wind="calm",
        seed=11,
        duration=30.0,
        settle_time=10.0,
        log_decimation=100,
    )


def presets() -> dict[str, ScenarioSpec]:
    """Fresh copies of every named preset."""
    out: dict[str, ScenarioSpec] = {
        "hover4": _hover4(),
        "nominal4": _nominal4(),
        "fig6-unplug40s": _fig6_unplug(),
        "firewall4": _firewall4(),
        "five-robot-5kg": _five_robot(),
        "scale100": _scale100(),
    }
    for level in (0.0, 0.5, 1.01):
        tag = {0.0: "0", 0.5: "0.5", 1.01: "1.01"}[level]
        spec = _fig5_base(f"fig5a-{tag}")
        spec.cable_uncertainty = level
        out[spec.name] = spec
    spec = _fig5_base("fig5b-capability")
    spec.f_max = UniformLaw(11.0, 19.0)
    # Half-kilogram airframes keep thrust-to-weight above two even at the
    # 11 N draw floor, so capability spread stresses load allocation rather
    # than making hover itself infeasible for the weakest robots.
    spec.robot_mass = 0.5
    spec.payload_mass = 3.0
    out[spec.name] = spec
    for load in (3.0, 5.0, 8.0):
        spec = _fig5_base(f"fig5c-{load:g}kg")
        spec.payload_mass = load
        out[spec.name] = spec
    for r in (0.5, 3.0, 8.0):
        spec = _fig5_base(f"fig5d-r{r:g}")
        spec.perception_range = r
        out[spec.name] = spec
    return out


def preset(name: str) -> ScenarioSpec:
    """Look up a named preset; raises ConfigError listing valid names."""
    table = presets()
    if name not in table:
        raise ConfigError(
            [f"unknown preset {name!r}; valid: {', '.join(sorted(table))}"]
        )
    return table[name]


@dataclass(frozen=True)
class MatrixEntry:
    """One benchmark cell: a preset run under a controller, repeated."""

    preset: str
    controller: str
    repeats: int


def fig5_matrix(repeats: int = 10,
                controllers: tuple[str, ...] = ("dissipative", "formation",
                                                "leader")) -> list[MatrixEntry]:
    """The benchmark grid: every perturbation cell under every controller."""
    cells = [
        "fig5a-0", "fig5a-0.5", "fig5a-1.01",
        "fig5b-capability",
        "fig5c-3kg", "fig5c-5kg", "fig5c-8kg",
        "fig5d-r0.5", "fig5d-r3", "fig5d-r8",
    ]
    return [
        MatrixEntry(preset=c, controller=ctrl, repeats=repeats)
        for c in cells
        for ctrl in controllers
    ]

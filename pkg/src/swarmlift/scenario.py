"""Declarative experiment descriptions and their resolution into runnable state.

A ScenarioSpec says *what* to simulate (team, perturbation laws, reference
path, events, seed); sample_instance freezes it into concrete numbers with
all randomness drawn from named substreams of one seed.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .baselines import BaselineGains, FormationTemplate
from .control import PDGains, rest_lengths_init
from .dynamics import CableModel, StateArrays, WindModel, WindParams
from .errors import ConfigError, EventTargetMissing, InvalidSample
from .model import ControllerParams, virtual_nodes_batch

GRAVITY_MAG = 9.81
CONTROLLERS = ("dissipative", "formation", "leader")
WIND_PRESETS = {
    "calm": WindParams(mean=np.zeros(3)),
    # Beaufort 4 spans 5.5-7.9 m/s; mean 6.5 m/s along +x with 1.5 m/s gusts.
    "beaufort4": WindParams(
        mean=np.array([6.5, 0.0, 0.0]), gust_std=1.5, correlation_time=2.0
    ),
    # Zero-mean turbulence: no static drag offset, only stochastic gusts.
    "gusty": WindParams(
        mean=np.zeros(3), gust_std=2.0, correlation_time=2.0
    ),
}
MIN_CABLE_LENGTH = 0.1


# ---------------------------------------------------------------------------
# Sampling laws
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class UniformLaw:
    """Uniform draw on [low, high], one value per robot."""

    low: float
    high: float

    def draw(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.uniform(self.low, self.high, n)


# ---------------------------------------------------------------------------
# Reference trajectory
# ---------------------------------------------------------------------------
@dataclass
class ReferenceTrajectory:
    """Waypoint path traversed with trapezoidal speed ramps, stopping at
    each waypoint; C1-continuous, speed never exceeds cruise_speed."""

    waypoints: np.ndarray  # (k, 3) absolute positions
    cruise_speed: float = 1.0
    ramp_accel: float = 0.5

    def __post_init__(self) -> None:
        self.waypoints = np.atleast_2d(np.asarray(self.waypoints, dtype=float))
        self._legs: list[dict[str, Any]] = []
        t0 = 0.0
        for a, b in zip(self.waypoints[:-1], self.waypoints[1:]):
            dist = float(np.linalg.norm(b - a))
            if dist < 1e-12:
                continue
            v, acc = self.cruise_speed, self.ramp_accel
            if dist >= v * v / acc:
                t_ramp = v / acc
                t_cruise = (dist - v * v / acc) / v
            else:
                v = math.sqrt(acc * dist)  # triangular profile, peak < cruise
                t_ramp = v / acc
                t_cruise = 0.0
            total = 2.0 * t_ramp + t_cruise
            self._legs.append(
                dict(t0=t0, total=total, t_ramp=t_ramp, v=v, acc=acc,
                     start=a.copy(), dirn=(b - a) / dist, dist=dist)
            )
            t0 += total
        self._t_end = t0
        self._starts = [leg["t0"] for leg in self._legs]

    @property
    def end_time(self) -> float:
        return self._t_end

    @property
    def final_point(self) -> np.ndarray:
        return self.waypoints[-1]


def reference_at(
    trajectory: ReferenceTrajectory, t: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Reference (position, velocity, acceleration) at time t."""
    zeros = np.zeros(3)
    legs = trajectory._legs
    if not legs or t <= 0.0:
        return trajectory.waypoints[0].copy(), zeros, zeros
    if t >= trajectory._t_end:
        return trajectory.final_point.copy(), zeros, zeros
    idx = bisect.bisect_right(trajectory._starts, t) - 1
    leg = legs[idx]
    tau = t - leg["t0"]
    acc, v, t_ramp, total = leg["acc"], leg["v"], leg["t_ramp"], leg["total"]
    if tau < t_ramp:  # speeding up
        s = 0.5 * acc * tau * tau
        speed, a_sign = acc * tau, acc
    elif tau <= total - t_ramp:  # cruising
        s = 0.5 * acc * t_ramp * t_ramp + v * (tau - t_ramp)
        speed, a_sign = v, 0.0
    else:  # slowing down
        rem = total - tau
        s = leg["dist"] - 0.5 * acc * rem * rem
        speed, a_sign = acc * rem, -acc
    d = leg["dirn"]
    return leg["start"] + s * d, speed * d, a_sign * d


# ---------------------------------------------------------------------------
# Events
# ---------------------------------------------------------------------------
@dataclass
class JoinSpec:
    """A robot added mid-run: its physical parameters and entry pose."""

    mass: float = 1.0
    f_max: float = 25.0
    cable_length: float = 2.0
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self) -> None:
        self.position = np.asarray(self.position, dtype=float)
        self.velocity = np.asarray(self.velocity, dtype=float)


@dataclass
class TimedEvent:
    """A scripted change at mission time ``time``: unplug | join | set_wind."""

    time: float
    kind: str
    robot_id: int | None = None
    join: JoinSpec | None = None
    wind: WindParams | None = None


# ---------------------------------------------------------------------------
# Scenario spec and resolved instance
# ---------------------------------------------------------------------------
@dataclass
class LayoutSpec:
    """Initial geometry: regular n-gon of taut cables around the payload."""

    elevation_deg: float = 45.0  # cable angle above horizontal
    phase_deg: float = 0.0
    payload_z: float = 1.0
    jitter: float = 0.0  # horizontal init perturbation half-width, m


@dataclass
class ScenarioSpec:
    """Complete declarative description of one experiment."""

    name: str = "unnamed"
    n_robots: int = 4
    robot_mass: float | list[float] = 1.0
    f_max: float | UniformLaw = 25.0
    cable_length: float = 2.0
    cable_uncertainty: float = 0.0  # half-width a of the L + U(-a, a) draw
    payload_mass: float = 4.0
    perception_range: float = 8.0
    h_c: float | None = None  # None: 1.5x the robot plane height over payload
    controller: str = "dissipative"
    layout: LayoutSpec = field(default_factory=LayoutSpec)
    waypoints: list[list[float]] = field(default_factory=lambda: [[0.0, 0.0, 0.0]])
    waypoints_absolute: bool = False
    cruise_speed: float = 1.0
    ramp_accel: float = 0.5
    events: list[TimedEvent] = field(default_factory=list)
    wind: str | WindParams = "calm"
    seed: int = 0
    duration: float = 30.0
    dt: float = 1e-3
    settle_time: float = 10.0
    log_decimation: int = 10
    control_decimation: int = 1
    escape_speed: float = 2.0
    leader_load_anchored: bool = False
    initial_detached: list[int] = field(default_factory=list)
    gains: dict[str, float] = field(default_factory=dict)
    pd_gains: dict[str, float] = field(default_factory=dict)
    baseline_gains: dict[str, float] = field(default_factory=dict)


def validate_scenario(spec: ScenarioSpec) -> list[str]:
    """Schema/sanity check; returns a list of violations (empty = valid)."""
    v: list[str] = []
    if spec.n_robots < 1:
        v.append(f"n_robots must be >= 1, got {spec.n_robots}")
    if spec.duration < 0:
        v.append(f"duration must be >= 0 s, got {spec.duration}")
    if spec.dt <= 0:
        v.append(f"dt must be > 0 s, got {spec.dt}")
    if spec.settle_time < 0:
        v.append(f"settle_time must be >= 0 s, got {spec.settle_time}")
    masses = np.atleast_1d(np.asarray(spec.robot_mass, dtype=float))
    if np.any(masses <= 0):
        v.append(f"robot_mass entries must be > 0 kg, got {spec.robot_mass}")
    if masses.size not in (1, spec.n_robots):
        v.append(
            f"robot_mass must be scalar or length {spec.n_robots}, "
            f"got {masses.size} entries"
        )
    if isinstance(spec.f_max, UniformLaw):
        if spec.f_max.low <= 0 or spec.f_max.high < spec.f_max.low:
            v.append(f"f_max law bounds invalid: {spec.f_max}")
    elif spec.f_max <= 0:
        v.append(f"f_max must be > 0 N, got {spec.f_max}")
    if spec.cable_length <= 0:
        v.append(f"cable_length must be > 0 m, got {spec.cable_length}")
    if spec.cable_uncertainty < 0:
        v.append(
            f"cable_uncertainty must be >= 0 m, got {spec.cable_uncertainty}"
        )
    if spec.payload_mass <= 0:
        v.append(f"payload_mass must be > 0 kg, got {spec.payload_mass}")
    if spec.perception_range <= 0:
        v.append(
            f"perception_range must be > 0 m, got {spec.perception_range}"
        )
    if spec.controller not in CONTROLLERS:
        v.append(
            f"controller must be one of {list(CONTROLLERS)}, "
            f"got {spec.controller!r}"
        )
    if isinstance(spec.wind, str) and spec.wind not in WIND_PRESETS:
        v.append(
            f"wind preset must be one of {sorted(WIND_PRESETS)}, "
            f"got {spec.wind!r}"
        )
    if spec.cruise_speed <= 0:
        v.append(f"cruise_speed must be > 0 m/s, got {spec.cruise_speed}")
    if spec.ramp_accel <= 0:
        v.append(f"ramp_accel must be > 0 m/s^2, got {spec.ramp_accel}")
    wps = np.asarray(spec.waypoints, dtype=float)
    if wps.ndim != 2 or wps.shape[1] != 3 or wps.shape[0] < 1:
        v.append(f"waypoints must be a (k>=1, 3) array, got shape {wps.shape}")
    if not (0 < spec.layout.elevation_deg < 90):
        v.append(
            "layout.elevation_deg must be in (0, 90), "
            f"got {spec.layout.elevation_deg}"
        )
    if spec.layout.jitter < 0:
        v.append(f"layout.jitter must be >= 0 m, got {spec.layout.jitter}")
    if spec.log_decimation < 1:
        v.append(f"log_decimation must be >= 1, got {spec.log_decimation}")
    if spec.control_decimation < 1:
        v.append(
            f"control_decimation must be >= 1, got {spec.control_decimation}"
        )
    if spec.seed < 0:
        v.append(f"seed must be a non-negative integer, got {spec.seed}")
    for rid in spec.initial_detached:
        if not 0 <= rid < spec.n_robots:
            v.append(f"initial_detached id {rid} outside [0, {spec.n_robots})")
    for i, ev in enumerate(spec.events):
        if not 0 <= ev.time <= spec.duration:
            v.append(
                f"events[{i}].time {ev.time} outside [0, {spec.duration}]"
            )
        if ev.kind not in ("unplug", "join", "set_wind"):
            v.append(f"events[{i}].kind {ev.kind!r} unknown")
        if ev.kind == "unplug" and ev.robot_id is None:
            v.append(f"events[{i}]: unplug requires robot_id")
        if ev.kind == "join" and ev.join is None:
            v.append(f"events[{i}]: join requires a robot spec")
        if ev.kind == "set_wind" and ev.wind is None:
            v.append(f"events[{i}]: set_wind requires wind params")
    return v


@dataclass
class ScenarioInstance:
    """A fully resolved, runnable experiment: every random draw frozen."""

    name: str
    controller: str
    n_robots: int
    masses: np.ndarray  # (n,)
    f_max: np.ndarray  # (n,)
    cable_lengths: np.ndarray  # (n,)
    payload_mass: float
    perception_range: float
    h_c: float
    positions0: np.ndarray  # (n, 3)
    velocities0: np.ndarray  # (n, 3)
    payload_pos0: np.ndarray
    payload_vel0: np.ndarray
    reference: ReferenceTrajectory
    template_offsets: np.ndarray  # (n, 3) nominal-design baseline slots
    share_force: float
    events: list[TimedEvent]
    wind: WindParams
    seed: int
    duration: float
    dt: float
    settle_time: float
    log_decimation: int
    control_decimation: int
    escape_speed: float
    leader_load_anchored: bool
    initial_detached: list[int]
    gains: dict[str, float]
    pd_gains: dict[str, float]
    baseline_gains: dict[str, float]
    drawn: dict[str, Any]

    def header_dict(self) -> dict[str, Any]:
        """JSON-able echo of the resolved instance for trace sidecars."""
        wind = self.wind
        return {
            "name": self.name,
            "controller": self.controller,
            "n_robots": self.n_robots,
            "masses": self.masses.tolist(),
            "f_max": self.f_max.tolist(),
            "cable_lengths": self.cable_lengths.tolist(),
            "payload_mass": self.payload_mass,
            "perception_range": self.perception_range,
            "h_c": self.h_c,
            "positions0": self.positions0.tolist(),
            "velocities0": self.velocities0.tolist(),
            "payload_pos0": self.payload_pos0.tolist(),
            "payload_vel0": self.payload_vel0.tolist(),
            "waypoints": self.reference.waypoints.tolist(),
            "cruise_speed": self.reference.cruise_speed,
            "ramp_accel": self.reference.ramp_accel,
            "template_offsets": self.template_offsets.tolist(),
            "share_force": self.share_force,
            "events": [
                {
                    "time": ev.time,
                    "kind": ev.kind,
                    "robot_id": ev.robot_id,
                    "join": None if ev.join is None else {
                        "mass": ev.join.mass,
                        "f_max": ev.join.f_max,
                        "cable_length": ev.join.cable_length,
                        "position": ev.join.position.tolist(),
                        "velocity": ev.join.velocity.tolist(),
                    },
                    "wind": None if ev.wind is None else {
                        "mean": np.asarray(ev.wind.mean).tolist(),
                        "gust_std": ev.wind.gust_std,
                        "correlation_time": ev.wind.correlation_time,
                    },
                }
                for ev in self.events
            ],
            "wind": {
                "mean": np.asarray(wind.mean).tolist(),
                "gust_std": wind.gust_std,
                "correlation_time": wind.correlation_time,
                "drag_robot": wind.drag_robot,
                "drag_payload": wind.drag_payload,
            },
            "seed": self.seed,
            "duration": self.duration,
            "dt": self.dt,
            "settle_time": self.settle_time,
            "log_decimation": self.log_decimation,
            "control_decimation": self.control_decimation,
            "escape_speed": self.escape_speed,
            "leader_load_anchored": self.leader_load_anchored,
            "initial_detached": list(self.initial_detached),
            "gains": dict(self.gains),
            "pd_gains": dict(self.pd_gains),
            "baseline_gains": dict(self.baseline_gains),
            "drawn": self.drawn,
        }


def resolve_wind(wind: str | WindParams) -> WindParams:
    if isinstance(wind, str):
        try:
            preset = WIND_PRESETS[wind]
        except KeyError as exc:
            raise ConfigError([f"unknown wind preset {wind!r}"]) from exc
        return WindParams(
            mean=np.array(preset.mean, dtype=float, copy=True),
            gust_std=preset.gust_std,
            correlation_time=preset.correlation_time,
            drag_robot=preset.drag_robot,
            drag_payload=preset.drag_payload,
        )
    return wind


def sample_instance(spec: ScenarioSpec, seed: int | None = None) -> ScenarioInstance:
    """Freeze a spec into a concrete instance.

    All randomness flows from one seed through named substreams drawn in a
    fixed order (cables, capabilities, wind, init); the wind stream seed is
    recorded and consumed later by the running simulation.
    """
    violations = validate_scenario(spec)
    if violations:
        raise ConfigError(violations)
    seed = spec.seed if seed is None else seed
    root = np.random.SeedSequence(seed)
    ss_cables, ss_caps, ss_wind, ss_init = root.spawn(4)
    rng_cables = np.random.default_rng(ss_cables)
    rng_caps = np.random.default_rng(ss_caps)
    rng_init = np.random.default_rng(ss_init)

    n = spec.n_robots
    drawn: dict[str, Any] = {"seed": seed, "wind_stream": "substream 2 of 4"}

    # Cable lengths: nominal + U(-a, a).
    a = spec.cable_uncertainty
    cable_draw = rng_cables.uniform(-a, a, n) if a > 0 else np.zeros(n)
    cable_lengths = spec.cable_length + cable_draw
    drawn["cable_draw"] = cable_draw.tolist()
    if np.any(cable_lengths <= MIN_CABLE_LENGTH):
        raise InvalidSample(
            f"drawn cable lengths {cable_lengths.tolist()} include values "
            f"<= {MIN_CABLE_LENGTH} m"
        )

    # Thrust ceilings: constant or uniform law.
    if isinstance(spec.f_max, UniformLaw):
        f_max = spec.f_max.draw(rng_caps, n)
        drawn["f_max_draw"] = f_max.tolist()
    else:
        f_max = np.full(n, float(spec.f_max))
    if np.any(f_max <= 0):
        raise InvalidSample(f"drawn thrust limits {f_max.tolist()} not positive")

    masses = np.atleast_1d(np.asarray(spec.robot_mass, dtype=float))
    if masses.size == 1:
        masses = np.full(n, float(masses[0]))
    else:
        masses = masses.astype(float).copy()

    # Initial layout: regular n-gon of taut cables around the payload, with
    # optional horizontal jitter drawn from the init stream.
    lay = spec.layout
    theta = math.radians(lay.elevation_deg)
    phase = math.radians(lay.phase_deg)
    payload_pos0 = np.array([0.0, 0.0, lay.payload_z])
    angles = phase + 2.0 * np.pi * np.arange(n) / n
    radius = cable_lengths * math.cos(theta)
    height = cable_lengths * math.sin(theta)
    positions0 = np.stack(
        [
            payload_pos0[0] + radius * np.cos(angles),
            payload_pos0[1] + radius * np.sin(angles),
            payload_pos0[2] + height,
        ],
        axis=1,
    )
    if lay.jitter > 0:
        jit = rng_init.uniform(-lay.jitter, lay.jitter, (n, 2))
        positions0[:, :2] += jit
        drawn["init_jitter"] = jit.tolist()
    # Initially detached bystanders spawn outside everyone's perception
    # range, so they cannot couple into the formation they never joined.
    for rid in spec.initial_detached:
        direction = np.array([math.cos(angles[rid]), math.sin(angles[rid])])
        positions0[rid, :2] = payload_pos0[:2] + direction * (
            1.5 * spec.perception_range + float(radius[rid])
        )
    velocities0 = np.zeros((n, 3))

    # Node plane: explicit, or 1.5x the robot-plane height above the payload,
    # sized from the longest possible cable draw so the plane clears every
    # robot under any uncertainty level.
    z_robot_nominal = payload_pos0[2] + spec.cable_length * math.sin(theta)
    z_robot_max = payload_pos0[2] + (
        (spec.cable_length + spec.cable_uncertainty) * math.sin(theta)
    )
    if spec.h_c is not None:
        h_c = float(spec.h_c)
    else:
        h_c = payload_pos0[2] + 1.5 * (z_robot_max - payload_pos0[2])
    z_top = payload_pos0[2] + float(np.max(cable_lengths)) * math.sin(theta)
    if h_c <= z_top:
        raise InvalidSample(
            f"h_c {h_c} must sit above the highest robot start {z_top}"
        )

    # Reference path: waypoints relative to the designed node-center start
    # unless marked absolute.
    ref0 = np.array([payload_pos0[0], payload_pos0[1], h_c])
    wps = np.asarray(spec.waypoints, dtype=float)
    if not spec.waypoints_absolute:
        wps = ref0[None, :] + wps
    reference = ReferenceTrajectory(
        waypoints=wps, cruise_speed=spec.cruise_speed,
        ramp_accel=spec.ramp_accel,
    )

    # Baseline template: nominal-design slot offsets from the reference
    # anchor (pre-designed formation; does not peek at drawn cable lengths).
    nominal_radius = spec.cable_length * math.cos(theta)
    template_offsets = np.stack(
        [
            nominal_radius * np.cos(angles),
            nominal_radius * np.sin(angles),
            np.full(n, z_robot_nominal - h_c),
        ],
        axis=1,
    )

    return ScenarioInstance(
        name=spec.name,
        controller=spec.controller,
        n_robots=n,
        masses=masses,
        f_max=f_max,
        cable_lengths=cable_lengths,
        payload_mass=float(spec.payload_mass),
        perception_range=float(spec.perception_range),
        h_c=h_c,
        positions0=positions0,
        velocities0=velocities0,
        payload_pos0=payload_pos0,
        payload_vel0=np.zeros(3),
        reference=reference,
        template_offsets=template_offsets,
        share_force=float(spec.payload_mass) * GRAVITY_MAG / n,
        events=list(spec.events),
        wind=resolve_wind(spec.wind),
        seed=seed,
        duration=float(spec.duration),
        dt=float(spec.dt),
        settle_time=float(spec.settle_time),
        log_decimation=int(spec.log_decimation),
        control_decimation=int(spec.control_decimation),
        escape_speed=float(spec.escape_speed),
        leader_load_anchored=bool(spec.leader_load_anchored),
        initial_detached=list(spec.initial_detached),
        gains=dict(spec.gains),
        pd_gains=dict(spec.pd_gains),
        baseline_gains=dict(spec.baseline_gains),
        drawn=drawn,
        )


# ---------------------------------------------------------------------------
# Mutable run state and event application
# ---------------------------------------------------------------------------
@dataclass
class RunState:
    """Everything an in-flight simulation mutates: bodies, cables, gains,
    wind process, and departure bookkeeping."""

    state: StateArrays
    cables: CableModel
    params: ControllerParams
    pd: PDGains
    bgains: BaselineGains
    template: FormationTemplate | None
    wind_model: WindModel
    departing: dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.state.positions.shape[0]


def apply_event(event: TimedEvent, rs: RunState) -> RunState:
    """Apply one timed event in place; returns the same RunState."""
    if event.kind == "unplug":
        return _apply_unplug(event, rs)
    if event.kind == "join":
        return _apply_join(event, rs)
    if event.kind == "set_wind":
        if event.wind is None:
            raise EventTargetMissing("set_wind event carries no wind params")
        rs.wind_model.set_params(event.wind)
        return rs
    raise EventTargetMissing(f"unknown event kind {event.kind!r}")


def _apply_unplug(event: TimedEvent, rs: RunState) -> RunState:
    rid = event.robot_id
    st = rs.state
    if rid is None or not 0 <= rid < rs.n:
        raise EventTargetMissing(f"unplug target {rid} does not exist")
    if not st.alive[rid] or not st.attached[rid]:
        raise EventTargetMissing(
            f"unplug target {rid} is not an attached, active robot"
        )
    st.attached[rid] = False
    # Escape radially (horizontal) from the centroid of the other robots.
    others = [i for i in range(rs.n) if i != rid and st.alive[i]]
    if others:
        away = st.positions[rid] - st.positions[others].mean(axis=0)
    else:
        away = np.array([1.0, 0.0, 0.0])
    away[2] = 0.0
    norm = float(np.linalg.norm(away))
    direction = away / norm if norm > 1e-9 else np.array([1.0, 0.0, 0.0])
    rs.departing[rid] = direction
    return rs


def _apply_join(event: TimedEvent, rs: RunState) -> RunState:
    js = event.join
    if js is None:
        raise EventTargetMissing("join event carries no robot spec")
    st = rs.state
    st.positions = np.vstack([st.positions, js.position[None, :]])
    st.velocities = np.vstack([st.velocities, js.velocity[None, :]])
    st.masses = np.append(st.masses, js.mass)
    st.f_max = np.append(st.f_max, js.f_max)
    st.alive = np.append(st.alive, True)
    st.attached = np.append(st.attached, True)
    rs.cables.lengths = np.append(rs.cables.lengths, js.cable_length)

    # Lock rest lengths for the newcomer's edges at join-time geometry.  Its
    # center rest uses the same estimate the law computes at runtime: the
    # centroid of its own node and the attached nodes it can perceive.
    n_new = st.positions.shape[0]
    nodes, _ = virtual_nodes_batch(
        st.positions, st.velocities, st.payload_pos, st.payload_vel,
        rs.params.h_c,
    )
    act = np.flatnonzero(st.alive & st.attached)
    dists_new = np.linalg.norm(
        st.positions[act] - st.positions[-1][None, :], axis=1
    )
    seen = act[dists_new <= rs.params.perception_range]
    center = nodes[seen].mean(axis=0)
    old = rs.params.rest_pair
    grown = np.zeros((n_new + 1, n_new + 1))
    grown[: old.shape[0], : old.shape[1]] = old
    dist_robots = np.linalg.norm(nodes[:-1] - nodes[-1], axis=1)
    grown[-1, 1:-1] = dist_robots
    grown[1:-1, -1] = dist_robots
    center_dist = float(np.linalg.norm(nodes[-1] - center))
    grown[-1, 0] = center_dist
    grown[0, -1] = center_dist
    rs.params.rest_pair = grown
    rs.params.rest_leg = np.append(
        rs.params.rest_leg, float(np.linalg.norm(nodes[-1] - st.positions[-1]))
    )
    return rs


def update_departures(rs: RunState, perception_range: float) -> list[int]:
    """Retire departing robots once they are beyond range of every other
    active robot; returns the ids retired this call."""
    retired: list[int] = []
    st = rs.state
    for rid in list(rs.departing):
        others = [i for i in range(rs.n) if i != rid and st.alive[i]]
        if not others:
            continue
        dists = np.linalg.norm(
            st.positions[others] - st.positions[rid][None, :], axis=1
        )
        if np.all(dists > perception_range):
            st.alive[rid] = False
            st.velocities[rid] = 0.0
            del rs.departing[rid]
            retired.append(rid)
    return retired


# ---------------------------------------------------------------------------
# Config file IO (YAML)
# ---------------------------------------------------------------------------
_EVENT_KEYS = {"time", "kind", "robot_id", "join", "wind"}
_JOIN_KEYS = {"mass", "f_max", "cable_length", "position", "velocity"}
_WIND_KEYS = {"mean", "gust_std", "correlation_time", "drag_robot",
              "drag_payload"}
_LAYOUT_KEYS = {"elevation_deg", "phase_deg", "payload_z", "jitter"}
_SPEC_KEYS = {
    "name", "n_robots", "robot_mass", "f_max", "cable_length",
    "cable_uncertainty", "payload_mass", "perception_range", "h_c",
    "controller", "layout", "waypoints", "waypoints_absolute", "cruise_speed",
    "ramp_accel", "events", "wind", "seed", "duration", "dt", "settle_time",
    "log_decimation", "control_decimation", "escape_speed",
    "leader_load_anchored", "initial_detached", "gains", "pd_gains",
    "baseline_gains",
}


def _wind_from_dict(d: dict[str, Any], where: str,
                    errors: list[str]) -> WindParams:
    unknown = set(d) - _WIND_KEYS
    if unknown:
        errors.append(f"{where}: unknown wind keys {sorted(unknown)}")
    mean = np.asarray(d.get("mean", [0.0, 0.0, 0.0]), dtype=float)
    return WindParams(
        mean=mean,
        gust_std=float(d.get("gust_std", 0.0)),
        correlation_time=float(d.get("correlation_time", 2.0)),
        drag_robot=float(d.get("drag_robot", 0.3)),
        drag_payload=float(d.get("drag_payload", 0.5)),
    )


def scenario_from_dict(data: dict[str, Any]) -> ScenarioSpec:
    """Build a ScenarioSpec from parsed config data; raises ConfigError
    listing every violated key."""
    errors: list[str] = []
    if not isinstance(data, dict):
        raise ConfigError(["config root must be a mapping"])
    unknown = set(data) - _SPEC_KEYS
    if unknown:
        errors.append(f"unknown keys {sorted(unknown)}")
    kwargs: dict[str, Any] = {
        k: data[k]
        for k in (
            "name", "n_robots", "robot_mass", "cable_length",
            "cable_uncertainty", "payload_mass", "perception_range", "h_c",
            "controller", "waypoints", "waypoints_absolute", "cruise_speed",
            "ramp_accel", "seed", "duration", "dt", "settle_time",
            "log_decimation", "control_decimation", "escape_speed",
            "leader_load_anchored", "initial_detached", "gains", "pd_gains",
            "baseline_gains",
        )
        if k in data
    }
    if "f_max" in data:
        fm = data["f_max"]
        if isinstance(fm, dict):
            if fm.get("law") != "uniform" or "low" not in fm or "high" not in fm:
                errors.append(
                    "f_max law must be {law: uniform, low: .., high: ..}, "
                    f"got {fm}"
                )
            else:
                kwargs["f_max"] = UniformLaw(float(fm["low"]), float(fm["high"]))
        else:
            kwargs["f_max"] = float(fm)
    if "layout" in data:
        lay = data["layout"]
        if not isinstance(lay, dict):
            errors.append("layout must be a mapping")
        else:
            bad = set(lay) - _LAYOUT_KEYS
            if bad:
                errors.append(f"layout: unknown keys {sorted(bad)}")
            kwargs["layout"] = LayoutSpec(
                **{k: lay[k] for k in _LAYOUT_KEYS if k in lay}
            )
    if "wind" in data:
        wd = data["wind"]
        if isinstance(wd, dict):
            kwargs["wind"] = _wind_from_dict(wd, "wind", errors)
        else:
            kwargs["wind"] = str(wd)
    events: list[TimedEvent] = []
    for i, ev in enumerate(data.get("events", [])):
        if not isinstance(ev, dict):
            errors.append(f"events[{i}] must be a mapping")
            continue
        bad = set(ev) - _EVENT_KEYS
        if bad:
            errors.append(f"events[{i}]: unknown keys {sorted(bad)}")
        join = None
        if isinstance(ev.get("join"), dict):
            jd = ev["join"]
            badj = set(jd) - _JOIN_KEYS
            if badj:
                errors.append(f"events[{i}].join: unknown keys {sorted(badj)}")
            join = JoinSpec(**{k: jd[k] for k in _JOIN_KEYS if k in jd})
        wind = None
        if isinstance(ev.get("wind"), dict):
            wind = _wind_from_dict(ev["wind"], f"events[{i}].wind", errors)
        events.append(
            TimedEvent(
                time=float(ev.get("time", -1.0)),
                kind=str(ev.get("kind", "")),
                robot_id=ev.get("robot_id"),
                join=join,
                wind=wind,
            )
        )
    if events:
        kwargs["events"] = events
    if errors:
        raise ConfigError(errors)
    try:
        spec = ScenarioSpec(**kwargs)
    except TypeError as exc:
        raise ConfigError([str(exc)]) from exc
    violations = validate_scenario(spec)
    if violations:
        raise ConfigError(violations)
    return spec


def load_scenario(path: str) -> ScenarioSpec:
    """Load and validate a scenario config file (YAML/JSON superset)."""
    import yaml

    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError([f"config file not found: {path}"]) from exc
    except yaml.YAMLError as exc:
        raise ConfigError([f"config parse error in {path}: {exc}"]) from exc
    if data is None:
        raise ConfigError([f"config file {path} is empty"])
    return scenario_from_dict(data)

"""Point-mass physics: unilateral cables, thrust saturation, wind, integrator.

Robots are double integrators driven by an acceleration command through a
thrust-saturation map; the payload is a point mass pulled by the cables.  The
integrator is semi-implicit (symplectic) Euler: velocities update from
current-state forces, then positions update from the new velocities.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalBlowup

BLOWUP_GUARD = 1e6  # m or m/s; any state magnitude beyond this aborts the run


@dataclass
class CableModel:
    """Pull-only spring-damper cable between a robot and the payload.

    Tension magnitude is max(0, k_c*s + c_c*s_dot) when the stretch s = d - L
    is positive, and exactly zero otherwise (a cable cannot push).
    """

    lengths: np.ndarray  # (n,) unstretched lengths L_i, m
    k_c: float = 2000.0  # N/m
    c_c: float = 50.0  # N*s/m


@dataclass
class WindParams:
    """Ornstein-Uhlenbeck gust model around a mean wind velocity."""

    mean: np.ndarray = field(default_factory=lambda: np.zeros(3))  # m/s
    gust_std: float = 0.0  # m/s, stationary standard deviation per axis
    correlation_time: float = 2.0  # s
    drag_robot: float = 0.3  # N per (m/s), force gain on each robot
    drag_payload: float = 0.5  # N per (m/s), force gain on the payload

    @property
    def enabled(self) -> bool:
        return bool(np.any(self.mean != 0.0) or self.gust_std > 0.0)


@dataclass
class WorldParams:
    """Global physics constants for a run."""

    dt: float = 1e-3  # s
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))
    wind: WindParams = field(default_factory=WindParams)


class WindModel:
    """Stateful OU wind: v' = v + (mean - v)*(1 - phi) + noise, exact scheme.

    The state is the full ambient wind velocity; with gust_std = 0 it settles
    on the mean immediately.  One sample is drawn per physics step regardless
    of how many bodies consume it, which keeps random streams independent of
    the robot population and of any robot's state.
    """

    def __init__(self, params: WindParams, dt: float):
        self.params = params
        self.dt = dt
        self.velocity = np.array(params.mean, dtype=float, copy=True)
        self._phi = float(np.exp(-dt / max(params.correlation_time, 1e-9)))
        self._noise_scale = params.gust_std * np.sqrt(1.0 - self._phi**2)

    def set_params(self, params: WindParams) -> None:
        """Swap wind parameters mid-run, keeping the current velocity state."""
        self.params = params
        self._phi = float(np.exp(-self.dt / max(params.correlation_time, 1e-9)))
        self._noise_scale = params.gust_std * np.sqrt(1.0 - self._phi**2)

    def step(self, rng: np.random.Generator) -> np.ndarray:
        """Advance one physics step and return the ambient wind velocity."""
        if not self.params.enabled:
            return self.velocity
        noise = rng.standard_normal(3)
        self.velocity = (
            self.params.mean
            + self._phi * (self.velocity - self.params.mean)
            + self._noise_scale * noise
        )
        return self.velocity


def wind_force(wind_velocity: np.ndarray, drag_coeff: float) -> np.ndarray:
    """Force exerted by ambient wind on a body via a linear drag gain."""
    return drag_coeff * np.asarray(wind_velocity, dtype=float)


def cable_tension(
    robot_pos: np.ndarray,
    robot_vel: np.ndarray,
    payload_pos: np.ndarray,
    payload_vel: np.ndarray,
    length: float,
    k_c: float = 2000.0,
    c_c: float = 50.0,
    attached: bool = True,
) -> np.ndarray:
    """Tension force on the robot (points from robot toward payload).

    Returns the zero vector when detached, slack, or when the damped tension
    would be negative (the cable cannot push).
    """
    if not attached:
        return np.zeros(3)
    offset = np.asarray(robot_pos, dtype=float) - np.asarray(payload_pos, dtype=float)
    dist = float(np.linalg.norm(offset))
    if dist <= 1e-12:
        return np.zeros(3)
    stretch = dist - length
    if stretch <= 0.0:
        return np.zeros(3)
    rel_vel = np.asarray(robot_vel, dtype=float) - np.asarray(payload_vel, dtype=float)
    stretch_rate = float(offset @ rel_vel) / dist
    magnitude = k_c * stretch + c_c * stretch_rate
    if magnitude <= 0.0:
        return np.zeros(3)
    return -magnitude / dist * offset


def cable_tensions_batch(
    positions: np.ndarray,
    velocities: np.ndarray,
    payload_pos: np.ndarray,
    payload_vel: np.ndarray,
    cables: CableModel,
    attached: np.ndarray,
) -> np.ndarray:
    """Vectorized tension on every robot; (n,3), zero rows when slack/detached."""
    offset = positions - payload_pos[None, :]
    dist = np.sqrt(np.einsum("ij,ij->i", offset, offset))
    safe = np.maximum(dist, 1e-12)
    stretch = dist - cables.lengths
    rel_vel = velocities - payload_vel[None, :]
    stretch_rate = np.einsum("ij,ij->i", offset, rel_vel) / safe
    magnitude = cables.k_c * stretch + cables.c_c * stretch_rate
    active = (stretch > 0.0) & (magnitude > 0.0) & np.asarray(attached, dtype=bool)
    magnitude = np.where(active, magnitude, 0.0)
    return -(magnitude / safe)[:, None] * offset


def saturate_thrust(
    a_cmd: np.ndarray, mass: float, f_max: float, gravity: np.ndarray
) -> np.ndarray:
    """Achievable acceleration under the thrust ceiling.

    Required thrust is F = m*(a_cmd - g).  If ||F|| <= F_max the command is
    achievable; otherwise the thrust vector is scaled back to the ceiling and
    the achievable acceleration g + (F_max/||F||)*(a_cmd - g) is returned.
    """
    a_cmd = np.asarray(a_cmd, dtype=float)
    gravity = np.asarray(gravity, dtype=float)
    thrust = mass * (a_cmd - gravity)
    norm = float(np.linalg.norm(thrust))
    if norm <= f_max:
        return a_cmd
    return gravity + (f_max / norm) * (a_cmd - gravity)


def saturate_thrust_batch(
    commands: np.ndarray, masses: np.ndarray, f_max: np.ndarray, gravity: np.ndarray
) -> np.ndarray:
    """Vectorized saturation; exact per-row match of saturate_thrust."""
    rel = commands - gravity[None, :]
    thrust_norm = masses * np.sqrt(np.einsum("ij,ij->i", rel, rel))
    over = thrust_norm > f_max
    scale = np.ones_like(thrust_norm)
    np.divide(f_max, thrust_norm, out=scale, where=over)
    return gravity[None, :] + scale[:, None] * rel


@dataclass
class StateArrays:
    """Structure-of-arrays snapshot of every body in the simulation."""

    positions: np.ndarray  # (n,3)
    velocities: np.ndarray  # (n,3)
    masses: np.ndarray  # (n,)
    f_max: np.ndarray  # (n,)
    alive: np.ndarray  # (n,) bool
    attached: np.ndarray  # (n,) bool
    payload_pos: np.ndarray  # (3,)
    payload_vel: np.ndarray  # (3,)
    payload_mass: float

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    def copy(self) -> "StateArrays":
        return StateArrays(
            positions=self.positions.copy(),
            velocities=self.velocities.copy(),
            masses=self.masses.copy(),
            f_max=self.f_max.copy(),
            alive=self.alive.copy(),
            attached=self.attached.copy(),
            payload_pos=self.payload_pos.copy(),
            payload_vel=self.payload_vel.copy(),
            payload_mass=self.payload_mass,
        )


def step(
    world: WorldParams,
    state: StateArrays,
    commands: np.ndarray,
    cables: CableModel,
    wind_velocity: np.ndarray,
    tick: int = 0,
    tensions: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Advance the world one dt in place; returns (tensions (n,3), realized (n,3)).

    Order of operations (semi-implicit Euler):
      1. tensions and wind forces from the current state,
      2. robot acceleration = saturate_thrust(command) + tension/m + wind/m,
         payload acceleration = -sum(tensions)/m_p + g + wind/m_p,
      3. velocities += dt * acceleration, then positions += dt * velocities.
    Dead robots are frozen in place.  Raises NumericalBlowup past the guard.
    A caller that already evaluated the tensions on this exact state may
    pass them in to skip the recomputation.
    """
    if tensions is None:
        tensions = cable_tensions_batch(
            state.positions,
            state.velocities,
            state.payload_pos,
            state.payload_vel,
            cables,
            state.attached & state.alive,
        )
    realized = saturate_thrust_batch(commands, state.masses, state.f_max, world.gravity)
    realized = realized + tensions / state.masses[:, None]
    if world.wind.enabled:
        realized = realized + wind_force(wind_velocity, world.wind.drag_robot)[
            None, :
        ] / state.masses[:, None]
    live = state.alive[:, None]
    realized = np.where(live, realized, 0.0)

    payload_acc = (
        -tensions.sum(axis=0) / state.payload_mass + world.gravity
    )
    if world.wind.enabled:
        payload_acc = payload_acc + wind_force(
            wind_velocity, world.wind.drag_payload
        ) / state.payload_mass

    dt = world.dt
    state.velocities += dt * realized
    state.velocities *= live  # dead robots stay frozen
    state.positions += dt * state.velocities
    state.payload_vel = state.payload_vel + dt * payload_acc
    state.payload_pos = state.payload_pos + dt * state.payload_vel

    limit = BLOWUP_GUARD
    if (
        not np.all(np.isfinite(state.positions))
        or not np.all(np.isfinite(state.payload_pos))
        or np.max(np.abs(state.positions)) > limit
        or np.max(np.abs(state.velocities)) > limit
        or np.max(np.abs(state.payload_pos)) > limit
        or np.max(np.abs(state.payload_vel)) > limit
    ):
        raise NumericalBlowup(tick, "position/velocity guard exceeded")
    return tensions, realized

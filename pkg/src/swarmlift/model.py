"""Core types and virtual-node kinematics.

Each flying robot is lifted to a *virtual node*: the point where the ray from
the payload through the robot crosses the horizontal plane z = h_c.  The node
construction turns a heterogeneous set of robots (different cable lengths,
different altitudes) into a set of coplanar points whose in-plane interactions
define the cooperative behavior.  The lever ratio k_d maps node-space forces
back to robot-space.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateAltitude

# Altitude-difference guard below which the node ray is considered undefined.
EPS_ALTITUDE = 1e-6
# Distance guard used in denominators of the control law.
EPS_LENGTH = 1e-4

GRAVITY = np.array([0.0, 0.0, -9.81])


def horizontal(vec: np.ndarray) -> np.ndarray:
    """Return a copy of vec with the vertical (z) component zeroed."""
    out = np.array(vec, dtype=float, copy=True)
    out[..., 2] = 0.0
    return out


@dataclass
class RobotState:
    """Point-mass robot: double integrator with a thrust ceiling."""

    position: np.ndarray  # (3,) m
    velocity: np.ndarray  # (3,) m/s
    mass: float  # kg
    f_max: float  # N, thrust magnitude ceiling
    cable_length: float  # m, unstretched cable length L_i
    alive: bool = True
    attached: bool = True

    def copy(self) -> "RobotState":
        return RobotState(
            position=np.array(self.position, dtype=float),
            velocity=np.array(self.velocity, dtype=float),
            mass=float(self.mass),
            f_max=float(self.f_max),
            cable_length=float(self.cable_length),
            alive=bool(self.alive),
            attached=bool(self.attached),
        )


@dataclass
class PayloadState:
    """Point-mass payload suspended from the robots."""

    position: np.ndarray  # (3,) m
    velocity: np.ndarray  # (3,) m/s
    mass: float  # kg

    def copy(self) -> "PayloadState":
        return PayloadState(
            position=np.array(self.position, dtype=float),
            velocity=np.array(self.velocity, dtype=float),
            mass=float(self.mass),
        )


@dataclass
class VirtualNode:
    """A robot's projection onto the node plane z = h_c."""

    position: np.ndarray  # (3,) m, position[2] == h_c
    velocity: np.ndarray  # (3,) m/s, velocity[2] == 0 for constant h_c


@dataclass
class FormationCenter:
    """Centroid (position and velocity) of a set of virtual nodes."""

    position: np.ndarray  # (3,)
    velocity: np.ndarray  # (3,)


@dataclass
class ConnectivityMatrix:
    """Symmetric binary perception gate w_ij (zero diagonal)."""

    w: np.ndarray  # (n, n) float 0/1

    @property
    def n(self) -> int:
        return self.w.shape[0]

    def neighbors(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.w[i] > 0.0)


@dataclass
class ControllerParams:
    """Gains, rest lengths and guards for the dissipative control law.

    rest_pair holds the node-node rest lengths as an (n+1, n+1) matrix whose
    row/column 0 is the formation center; the robot-robot block is
    rest_pair[1:, 1:].  rest_leg holds the node-robot ("virtual leg") rest
    lengths, one per robot.
    """

    # Calibrated once on the nominal 4-robot scenario and frozen.  The
    # center spring is deliberately stiff relative to the pair springs:
    # its locked rest lengths are the only spacing targets that remain
    # symmetric when the team size changes, so it is what drives survivors
    # to re-spread (and re-balance cable tensions) after a robot detaches.
    k_pair: float = 4.0  # N/m, node-node spring gain (k_ij)
    c_pair: float = 4.0  # N*s/m, node-node radial damping gain (c_ij)
    k_center: float = 100.0  # N/m, node-center spring gain (k_i0)
    c_center: float = 30.0  # N*s/m, node-center radial damping gain (c_i0)
    k_leg: float = 100.0  # N/m, node-robot spring gain (k_i)
    c_leg: float = 30.0  # N*s/m, node-robot radial damping gain (c_i)
    f_c: float = 4.0  # N*s/m, drag versus formation-center motion
    h_c: float = 0.0  # m, node-plane altitude (current value)
    perception_range: float = 8.0  # m
    rest_pair: np.ndarray | None = None  # (n+1, n+1), index 0 = center
    rest_leg: np.ndarray | None = None  # (n,)
    eps_altitude: float = EPS_ALTITUDE
    eps_length: float = EPS_LENGTH
    # Sign convention of the printed control law.  +1 ships as printed; the
    # flag exists so a sign audit can flip individual terms without editing
    # the law itself.
    term_signs: tuple[float, float, float, float, float, float] = (
        -1.0,  # node-node spring
        +1.0,  # node-robot spring
        -1.0,  # center drag
        -1.0,  # tension compensation
        -1.0,  # node-node damping
        +1.0,  # node-robot damping
    )


def virtual_node_position(
    robot_pos: np.ndarray,
    payload_pos: np.ndarray,
    h_c: float,
    eps: float = EPS_ALTITUDE,
) -> np.ndarray:
    """Project a robot onto the node plane along the payload->robot ray.

    q = x_r + ((h_c - h_r) / (h_r - h_p)) * (x_r - x_p)
    """
    robot_pos = np.asarray(robot_pos, dtype=float)
    payload_pos = np.asarray(payload_pos, dtype=float)
    dz = robot_pos[2] - payload_pos[2]
    if abs(dz) < eps:
        raise DegenerateAltitude(
            f"robot/payload altitude gap {dz:.3e} m is below the {eps:.1e} m guard"
        )
    scale = (h_c - robot_pos[2]) / dz
    return robot_pos + scale * (robot_pos - payload_pos)


def virtual_node_velocity(
    robot_pos: np.ndarray,
    robot_vel: np.ndarray,
    payload_pos: np.ndarray,
    payload_vel: np.ndarray,
    h_c: float,
    eps: float = EPS_ALTITUDE,
) -> np.ndarray:
    """Exact time derivative of the node position (h_c held constant).

    With s = (h_c - h_r)/(h_r - h_p):
      q_dot = x_r_dot + s_dot (x_r - x_p) + s (x_r_dot - x_p_dot)
      s_dot = [-h_r_dot (h_r - h_p) - (h_c - h_r)(h_r_dot - h_p_dot)] / (h_r - h_p)^2
    The vertical component is identically zero.
    """
    robot_pos = np.asarray(robot_pos, dtype=float)
    robot_vel = np.asarray(robot_vel, dtype=float)
    payload_pos = np.asarray(payload_pos, dtype=float)
    payload_vel = np.asarray(payload_vel, dtype=float)
    dz = robot_pos[2] - payload_pos[2]
    if abs(dz) < eps:
        raise DegenerateAltitude(
            f"robot/payload altitude gap {dz:.3e} m is below the {eps:.1e} m guard"
        )
    s = (h_c - robot_pos[2]) / dz
    dz_rate = robot_vel[2] - payload_vel[2]
    s_dot = (-robot_vel[2] * dz - (h_c - robot_pos[2]) * dz_rate) / (dz * dz)
    return robot_vel + s_dot * (robot_pos - payload_pos) + s * (robot_vel - payload_vel)


def virtual_nodes_batch(
    positions: np.ndarray,
    velocities: np.ndarray,
    payload_pos: np.ndarray,
    payload_vel: np.ndarray,
    h_c: float,
    eps: float = EPS_ALTITUDE,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized node position/velocity for all robots at once.

    Altitude gaps below the guard are clamped (sign-preserving) rather than
    raised: inside the integration loop degeneracy is a diagnostic, not an
    abort.  Returns (nodes (n,3), node_vels (n,3)).
    """
    positions = np.asarray(positions, dtype=float)
    velocities = np.asarray(velocities, dtype=float)
    dz = positions[:, 2] - payload_pos[2]
    sign = np.where(dz >= 0.0, 1.0, -1.0)
    dz = sign * np.maximum(np.abs(dz), eps)
    s = (h_c - positions[:, 2]) / dz
    offset = positions - payload_pos[None, :]
    nodes = positions + s[:, None] * offset
    dz_rate = velocities[:, 2] - payload_vel[2]
    s_dot = (-velocities[:, 2] * dz - (h_c - positions[:, 2]) * dz_rate) / (dz * dz)
    rel_vel = velocities - payload_vel[None, :]
    node_vels = velocities + s_dot[:, None] * offset + s[:, None] * rel_vel
    return nodes, node_vels


def lever_ratio(
    payload_alt: float, robot_alt: float, h_c: float, eps: float = EPS_ALTITUDE
) -> float:
    """Force lever ratio k_d = (h_p - h_r) / (h_p - h_c).

    Equals the inverse of the node projection scale: robot offsets from the
    payload are k_d times the node offsets, so a node-space force maps to a
    robot-space force through k_d.
    """
    denom = payload_alt - h_c
    if abs(denom) < eps:
        raise DegenerateAltitude(
            f"payload altitude within {eps:.1e} m of the node plane"
        )
    return (payload_alt - robot_alt) / denom


def lever_ratio_batch(
    payload_alt: float, robot_alts: np.ndarray, h_c: float, eps: float = EPS_ALTITUDE
) -> np.ndarray:
    denom = payload_alt - h_c
    sign = 1.0 if denom >= 0.0 else -1.0
    denom = sign * max(abs(denom), eps)
    return (payload_alt - np.asarray(robot_alts, dtype=float)) / denom


def connectivity(
    positions: np.ndarray,
    perception_range: float,
    alive: np.ndarray | None = None,
) -> ConnectivityMatrix:
    """Binary perception gate from pairwise robot distances.

    w_ij = 1 iff i != j, both robots are alive, and ||x_i - x_j|| <= r.
    """
    positions = np.asarray(positions, dtype=float)
    n = positions.shape[0]
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    w = (dist <= perception_range).astype(float)
    np.fill_diagonal(w, 0.0)
    if alive is not None:
        mask = np.asarray(alive, dtype=bool).astype(float)
        w *= mask[:, None] * mask[None, :]
    return ConnectivityMatrix(w=w)

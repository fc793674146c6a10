"""Dissipative virtual-node control law and its observation interface.

Every robot computes its command from a LocalObservation only: its own state,
the states of robots inside its perception range, the payload state, and its
own cable tension.  The command is a sum of node-space spring/damper forces
(mapped to robot space through the lever ratio k_d), a virtual-leg
spring/damper in robot space, a drag term versus the locally estimated
formation-center motion, and tension/gravity bookkeeping terms that cancel
against the acceleration-command feed-forward.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CoincidentNodes
from .model import (
    ControllerParams,
    FormationCenter,
    horizontal,
    lever_ratio,
    lever_ratio_batch,
    virtual_node_position,
    virtual_node_velocity,
    virtual_nodes_batch,
)


@dataclass
class LocalObservation:
    """Everything a single robot is allowed to see at one control tick."""

    self_id: int
    position: np.ndarray  # (3,)
    velocity: np.ndarray  # (3,)
    mass: float
    neighbor_ids: np.ndarray  # (k,) int, robots with w_ij = 1
    neighbor_pos: np.ndarray  # (k,3)
    neighbor_vel: np.ndarray  # (k,3)
    payload_pos: np.ndarray  # (3,)
    payload_vel: np.ndarray  # (3,)
    tension: np.ndarray  # (3,) own cable tension on the robot


@dataclass
class PDGains:
    """Reference-tracking PD for the formation center.

    Deliberately identical to the baselines' tracking PD so benchmark
    differences come from the cooperative law, not the outer loop.
    """

    k_p: float = 2.5
    k_v: float = 3.2
    clamp: float = 12.0  # m/s^2 per-axis command clamp


def rest_lengths_init(
    nodes: np.ndarray, eps: float = 1e-6, w: np.ndarray | None = None
) -> np.ndarray:
    """Capture node-node rest lengths at formation lock.

    Returns an (n+1, n+1) symmetric matrix; index 0 is the formation center,
    indices 1..n are robots.  Each robot's center rest length is measured
    against the same centroid estimate the control law uses at runtime: the
    mean of its own node and its perceived neighbors' nodes.  With full
    connectivity (``w`` omitted) that is the global node centroid for every
    robot.  Raises CoincidentNodes when two nodes (or a node and its
    perceived center) coincide.
    """
    nodes = np.asarray(nodes, dtype=float)
    n = nodes.shape[0]
    if w is None:
        w = np.ones((n, n)) - np.eye(n)
    else:
        w = np.asarray(w, dtype=float)
    deg = 1.0 + w.sum(axis=1)
    centers = (nodes + w @ nodes) / deg[:, None]

    diff = nodes[:, None, :] - nodes[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    center_dist = np.linalg.norm(nodes - centers, axis=1)

    out = np.zeros((n + 1, n + 1))
    out[1:, 1:] = dist
    out[1:, 0] = center_dist
    out[0, 1:] = center_dist

    off_diag = dist + np.eye(n) * 1e9
    # A node may legitimately coincide with its perceived center only in the
    # n=1 case (a single robot's node is its own centroid).
    if n > 1 and (np.any(off_diag < eps) or np.any(center_dist < eps)):
        if np.any(off_diag < eps):
            i, j = np.argwhere(off_diag < eps)[0]
            raise CoincidentNodes(
                f"nodes {i} and {j} coincide at formation lock")
        i = int(np.argmin(center_dist))
        raise CoincidentNodes(
            f"node {i} coincides with its perceived center at formation lock")
    return out


def _node_centroid(
    own_node_pos: np.ndarray,
    own_node_vel: np.ndarray,
    neighbor_node_pos: np.ndarray,
    neighbor_node_vel: np.ndarray,
) -> FormationCenter:
    pos_all = np.vstack([own_node_pos[None, :], neighbor_node_pos]) if len(
        neighbor_node_pos
    ) else own_node_pos[None, :]
    vel_all = np.vstack([own_node_vel[None, :], neighbor_node_vel]) if len(
        neighbor_node_vel
    ) else own_node_vel[None, :]
    return FormationCenter(position=pos_all.mean(axis=0), velocity=vel_all.mean(axis=0))


def formation_center_estimate(
    obs: LocalObservation, params: ControllerParams
) -> FormationCenter:
    """Centroid of the robot's own node and its perceived neighbors' nodes."""
    q_i = virtual_node_position(obs.position, obs.payload_pos, params.h_c,
                                params.eps_altitude)
    qd_i = virtual_node_velocity(
        obs.position, obs.velocity, obs.payload_pos, obs.payload_vel,
        params.h_c, params.eps_altitude,
    )
    if len(obs.neighbor_ids):
        q_j, qd_j = virtual_nodes_batch(
            obs.neighbor_pos, obs.neighbor_vel, obs.payload_pos, obs.payload_vel,
            params.h_c, params.eps_altitude,
        )
    else:
        q_j, qd_j = np.zeros((0, 3)), np.zeros((0, 3))
    return _node_centroid(q_i, qd_i, q_j, qd_j)


def dissipative_control(
    obs: LocalObservation,
    params: ControllerParams,
    gravity: np.ndarray | None = None,
) -> np.ndarray:
    """Per-robot dissipative command force u_i (N).

    u_i = -k_d k_ij sum_j w_ij ((1 - l_ij0/l_ij)(q_i - q_j))_hor     [node springs]
          + k_i (1 - l_i0/l_i)(q_i - x_i)                            [leg spring]
          - k_d f_c (q_i_dot - x_0_dot)_hor                          [center drag]
          - f_i                                                      [tension comp.]
          - k_d c_ij sum_j ((w_ij/l_ij^2)(q_i-q_j)^T(q_i_dot-q_j_dot)(q_i-q_j))_hor
          + (c_i/l_i^2)(q_i-x_i)^T(q_i_dot-x_i_dot)(q_i-x_i)         [leg damping]
          - m_i g
    where the j-sum runs over perceived neighbors plus the locally estimated
    formation center (index 0), and "hor" zeroes the vertical component.
    The center element of the sum carries its own spring/damping gains
    (k_center, c_center); the locked rest length to the center is the only
    spacing target that stays symmetric when the team size changes, so a
    stiff center spring is what drives survivors to re-spread evenly after
    a robot detaches.
    """
    if gravity is None:
        gravity = np.array([0.0, 0.0, -9.81])
    h_c = params.h_c
    eps_l = params.eps_length
    s1, s2, s3, s4, s5, s6 = params.term_signs

    q_i = virtual_node_position(obs.position, obs.payload_pos, h_c, params.eps_altitude)
    qd_i = virtual_node_velocity(
        obs.position, obs.velocity, obs.payload_pos, obs.payload_vel, h_c,
        params.eps_altitude,
    )
    k_d = lever_ratio(obs.payload_pos[2], obs.position[2], h_c, params.eps_altitude)

    k = len(obs.neighbor_ids)
    if k:
        q_j, qd_j = virtual_nodes_batch(
            obs.neighbor_pos, obs.neighbor_vel, obs.payload_pos, obs.payload_vel,
            h_c, params.eps_altitude,
        )
    else:
        q_j = np.zeros((0, 3))
        qd_j = np.zeros((0, 3))

    center = _node_centroid(q_i, qd_i, q_j, qd_j)

    # j-sum over perceived neighbors (indices 1..n in the rest matrix).
    rest_row = params.rest_pair[obs.self_id + 1]
    rest = rest_row[np.asarray(obs.neighbor_ids, dtype=int) + 1]

    diff = q_i[None, :] - q_j
    dvel = qd_i[None, :] - qd_j
    dist = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    safe = np.maximum(dist, eps_l)

    spring = ((1.0 - rest / safe)[:, None] * diff).sum(axis=0)
    radial_rate = np.einsum("ij,ij->i", diff, dvel)
    damping = ((radial_rate / (safe * safe))[:, None] * diff).sum(axis=0)

    # j=0 term: the locally estimated formation center, with its own gains.
    cdiff = q_i - center.position
    cdvel = qd_i - center.velocity
    csafe = max(float(np.linalg.norm(cdiff)), eps_l)
    cspring = (1.0 - rest_row[0] / csafe) * cdiff
    cdamping = float(cdiff @ cdvel) / (csafe * csafe) * cdiff

    u = s1 * k_d * (params.k_pair * horizontal(spring)
                    + params.k_center * horizontal(cspring))
    u += s5 * k_d * (params.c_pair * horizontal(damping)
                     + params.c_center * horizontal(cdamping))
    u += s3 * k_d * params.f_c * horizontal(qd_i - center.velocity)

    # Virtual leg between the node and the robot (full 3-D).
    leg = q_i - obs.position
    leg_len = max(float(np.linalg.norm(leg)), eps_l)
    leg_rest = params.rest_leg[obs.self_id]
    u += s2 * params.k_leg * (1.0 - leg_rest / leg_len) * leg
    leg_rate = float(leg @ (qd_i - obs.velocity))
    u += s6 * params.c_leg * leg_rate / (leg_len * leg_len) * leg

    u += s4 * obs.tension
    u += -obs.mass * gravity
    return u


def dissipative_control_batch(
    positions: np.ndarray,
    velocities: np.ndarray,
    payload_pos: np.ndarray,
    payload_vel: np.ndarray,
    tensions: np.ndarray,
    masses: np.ndarray,
    w: np.ndarray,
    params: ControllerParams,
    gravity: np.ndarray,
    nodes: np.ndarray | None = None,
    node_vels: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized dissipative law for all robots at once.

    Exactly mirrors dissipative_control (w-masked terms contribute exact
    zeros, so out-of-range state changes cannot alter any output bit).
    Callers that already projected the virtual nodes may pass them in to
    skip the recomputation.  Returns (u (n,3), center_pos (n,3),
    center_vel (n,3)).
    """
    n = positions.shape[0]
    eps_l = params.eps_length
    s1, s2, s3, s4, s5, s6 = params.term_signs

    if nodes is None or node_vels is None:
        q, qd = virtual_nodes_batch(
            positions, velocities, payload_pos, payload_vel, params.h_c,
            params.eps_altitude,
        )
    else:
        q, qd = nodes, node_vels
    k_d = lever_ratio_batch(payload_pos[2], positions[:, 2], params.h_c,
                            params.eps_altitude)

    # Per-robot center estimates over {self} ∪ perceived neighbors.
    deg = 1.0 + w.sum(axis=1)
    center_pos = (q + w @ q) / deg[:, None]
    center_vel = (qd + w @ qd) / deg[:, None]

    diff = q[:, None, :] - q[None, :, :]
    dvel = qd[:, None, :] - qd[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    safe = np.maximum(dist, eps_l)
    rest = params.rest_pair[1:, 1:]

    coeff = w * (1.0 - rest / safe)
    spring = np.einsum("ij,ijk->ik", coeff, diff)
    radial_rate = np.einsum("ijk,ijk->ij", diff, dvel)
    dcoeff = w * radial_rate / (safe * safe)
    damping = np.einsum("ij,ijk->ik", dcoeff, diff)

    # Center (index 0) contribution, with its own gains.
    cdiff = q - center_pos
    cdvel = qd - center_vel
    cdist = np.sqrt(np.einsum("ij,ij->i", cdiff, cdiff))
    csafe = np.maximum(cdist, eps_l)
    crest = params.rest_pair[1:, 0]
    cspring = (1.0 - crest / csafe)[:, None] * cdiff
    cradial = np.einsum("ij,ij->i", cdiff, cdvel)
    cdamping = (cradial / (csafe * csafe))[:, None] * cdiff

    u = s1 * k_d[:, None] * (params.k_pair * horizontal(spring)
                             + params.k_center * horizontal(cspring))
    u += s5 * k_d[:, None] * (params.c_pair * horizontal(damping)
                              + params.c_center * horizontal(cdamping))
    u += s3 * k_d[:, None] * params.f_c * horizontal(qd - center_vel)

    leg = q - positions
    leg_len = np.maximum(np.sqrt(np.einsum("ij,ij->i", leg, leg)), eps_l)
    u += s2 * params.k_leg * ((1.0 - params.rest_leg / leg_len)[:, None] * leg)
    leg_rate = np.einsum("ij,ij->i", leg, qd - velocities)
    u += s6 * params.c_leg * ((leg_rate / (leg_len * leg_len))[:, None] * leg)

    u += s4 * tensions
    u += -masses[:, None] * gravity[None, :]
    return u, center_pos, center_vel


def expected_acceleration(
    ref_pos: np.ndarray,
    ref_vel: np.ndarray,
    ref_acc: np.ndarray,
    center_pos: np.ndarray,
    center_vel: np.ndarray,
    gains: PDGains,
) -> np.ndarray:
    """PD tracking of the reference by the formation-center estimate.

    a = a_ref + K_p (x_ref - x_0) + K_v (v_ref - v_0), clamped per axis.
    Works on single vectors or (n,3) batches.
    """
    a = ref_acc + gains.k_p * (ref_pos - center_pos) + gains.k_v * (ref_vel - center_vel)
    return np.clip(a, -gains.clamp, gains.clamp)


def acceleration_command(
    a_expected: np.ndarray,
    u: np.ndarray,
    tension: np.ndarray,
    mass: float | np.ndarray,
    gravity: np.ndarray,
) -> np.ndarray:
    """a_cmd = a_expected + u/m + f/m + g, exactly as printed.

    The -f and -m g inside u cancel the +f/m and +g here, so the net command
    is a_expected plus the spring/damper forces over the mass.  Both forms are
    kept so the bookkeeping matches the published law term for term.
    """
    m = np.asarray(mass, dtype=float)
    if m.ndim == 1:
        m = m[:, None]
    return a_expected + u / m + tension / m + gravity


def invariant_set_residual(
    positions: np.ndarray,
    velocities: np.ndarray,
    nodes: np.ndarray,
    node_vels: np.ndarray,
    w: np.ndarray,
    center_vel: np.ndarray,
) -> float:
    """Sum of squared residuals of the invariant-set membership conditions.

    (a) w_ij (x_i_dot - x_j_dot)^T (x_i - x_j)_hor   over unordered pairs,
    (b) ||x_i_dot - x_0_dot||                        per robot,
    (c) (q_i_dot - x_i_dot)^T (q_i - x_i)            per robot.
    center_vel may be one global vector or an (n,3) per-robot estimate.
    """
    n = positions.shape[0]
    diff = positions[:, None, :] - positions[None, :, :]
    diff_h = diff.copy()
    diff_h[:, :, 2] = 0.0
    dvel = velocities[:, None, :] - velocities[None, :, :]
    pair_terms = w * np.einsum("ijk,ijk->ij", dvel, diff_h)
    iu = np.triu_indices(n, k=1)
    total = float(np.sum(pair_terms[iu] ** 2))

    cv = np.asarray(center_vel, dtype=float)
    if cv.ndim == 1:
        cv = np.broadcast_to(cv, velocities.shape)
    total += float(np.sum((velocities - cv) ** 2))

    leg = nodes - positions
    leg_rate = np.einsum("ij,ij->i", node_vels - velocities, leg)
    total += float(np.sum(leg_rate**2))
    return total

"""Comparison controllers: payload-leader and formation-based strategies.

Both emit desired-acceleration commands through the same observation,
saturation, and cable physics as the dissipative controller; only the
command law differs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .control import LocalObservation
from .errors import MissingTemplate
from .model import PayloadState

ReferenceFn = Callable[[float], tuple[np.ndarray, np.ndarray, np.ndarray]]


@dataclass
class BaselineGains:
    """PD and edge-spring gains shared by both comparison strategies.

    ``share_force`` is the equal-share static compensation in newtons
    (payload weight divided by team size), resolved per scenario.
    """

    k_p: float = 2.5
    k_v: float = 3.2
    k_edge: float = 12.0
    c_edge: float = 8.0
    clamp: float = 12.0
    share_force: float = 0.0


@dataclass
class FormationTemplate:
    """Fixed per-robot offsets from a formation anchor, in meters.

    Designed for exactly ``n`` robots; edge rest lengths derive from the
    offsets themselves.
    """

    offsets: np.ndarray  # (n, 3)
    edge_lengths: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        self.offsets = np.asarray(self.offsets, dtype=float)
        diff = self.offsets[:, None, :] - self.offsets[None, :, :]
        self.edge_lengths = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    @property
    def n(self) -> int:
        return self.offsets.shape[0]

    def offset_for(self, robot_id: int) -> np.ndarray:
        if robot_id < 0 or robot_id >= self.n:
            raise MissingTemplate(
                f"template defines {self.n} slots; robot {robot_id} has none"
            )
        return self.offsets[robot_id]


def ring_template(n: int, radius: float, z_offset: float = 0.0) -> FormationTemplate:
    """Regular polygon template of ``n`` slots at ``radius`` from the anchor."""
    angles = 2.0 * np.pi * np.arange(n) / n
    offsets = np.stack(
        [radius * np.cos(angles), radius * np.sin(angles), np.full(n, z_offset)],
        axis=1,
    )
    return FormationTemplate(offsets=offsets)


# ---------------------------------------------------------------------------
# Payload-leader strategy
# ---------------------------------------------------------------------------
def payload_leader_control(
    load: PayloadState,
    offset: np.ndarray,
    reference: ReferenceFn,
    t: float,
    gains: BaselineGains,
    own_pos: np.ndarray,
    own_vel: np.ndarray,
    mass: float,
    load_anchored: bool = True,
) -> np.ndarray:
    """Centralized desired-position tracking anchored to the load.

    Desired position = anchor + offset, where the anchor is the measured
    load state (default) or the reference trajectory when load feedback is
    configured off. Returns a desired total acceleration; the thrust map
    supplies gravity compensation and ``share_force`` lifts the nominal
    equal-share cable tension.
    """
    ref_pos, ref_vel, ref_acc = reference(t)
    if load_anchored:
        anchor_pos, anchor_vel = load.position, load.velocity
    else:
        anchor_pos, anchor_vel = ref_pos, ref_vel
    desired_pos = anchor_pos + offset
    err = desired_pos - own_pos
    verr = anchor_vel - own_vel
    a = ref_acc + gains.k_p * err + gains.k_v * verr
    a = np.clip(a, -gains.clamp, gains.clamp)
    a = a + np.array([0.0, 0.0, gains.share_force / mass])
    return a


def payload_leader_control_batch(
    load: PayloadState,
    template: FormationTemplate,
    reference: ReferenceFn,
    t: float,
    gains: BaselineGains,
    positions: np.ndarray,
    velocities: np.ndarray,
    masses: np.ndarray,
    load_anchored: bool = True,
) -> np.ndarray:
    """Vectorized payload-leader commands for the whole team."""
    n = positions.shape[0]
    if template.n != n:
        raise MissingTemplate(
            f"template defines {template.n} slots for {n} robots"
        )
    ref_pos, ref_vel, ref_acc = reference(t)
    if load_anchored:
        anchor_pos, anchor_vel = load.position, load.velocity
    else:
        anchor_pos, anchor_vel = ref_pos, ref_vel
    err = (anchor_pos + template.offsets) - positions
    verr = anchor_vel[None, :] - velocities
    a = ref_acc[None, :] + gains.k_p * err + gains.k_v * verr
    a = np.clip(a, -gains.clamp, gains.clamp)
    a[:, 2] += gains.share_force / masses
    return a


# ---------------------------------------------------------------------------
# Formation-based strategy
# ---------------------------------------------------------------------------
def formation_based_control(
    obs: LocalObservation,
    template: FormationTemplate,
    reference: ReferenceFn,
    t: float,
    gains: BaselineGains,
) -> np.ndarray:
    """Explicit inter-robot distance keeping against template edge lengths.

    Spring-dampers act on perceived edges only; an anchor estimate built
    from perceived slots carries the same reference-tracking feed-forward
    as the dissipative controller, and ``share_force`` lifts the nominal
    cable tension.
    """
    template.offset_for(obs.self_id)  # validates the slot exists
    ref_pos, ref_vel, ref_acc = reference(t)

    # Anchor estimate: average of (position - template offset) over self and
    # perceived neighbors.
    ids = np.concatenate([[obs.self_id], obs.neighbor_ids]).astype(int)
    if np.any(ids >= template.n):
        raise MissingTemplate(
            f"template defines {template.n} slots; saw robot {int(ids.max())}"
        )
    pts = np.vstack([obs.position[None, :], obs.neighbor_pos])
    vels = np.vstack([obs.velocity[None, :], obs.neighbor_vel])
    anchor_pos = (pts - template.offsets[ids]).mean(axis=0)
    anchor_vel = vels.mean(axis=0)

    a = ref_acc + gains.k_p * (ref_pos - anchor_pos) + gains.k_v * (ref_vel - anchor_vel)
    a = np.clip(a, -gains.clamp, gains.clamp)

    # Edge terms on perceived neighbors.
    for j, jpos, jvel in zip(obs.neighbor_ids, obs.neighbor_pos, obs.neighbor_vel):
        rest = template.edge_lengths[obs.self_id, int(j)]
        edge = obs.position - jpos
        length = float(np.linalg.norm(edge))
        if length < 1e-9:
            continue
        dvel = obs.velocity - jvel
        a = a - gains.k_edge * (1.0 - rest / length) * edge
        a = a - gains.c_edge * (float(edge @ dvel) / length**2) * edge

    a[2] += gains.share_force / obs.mass
    return a


def formation_based_control_batch(
    positions: np.ndarray,
    velocities: np.ndarray,
    masses: np.ndarray,
    w: np.ndarray,
    template: FormationTemplate,
    reference: ReferenceFn,
    t: float,
    gains: BaselineGains,
) -> np.ndarray:
    """Vectorized formation-based commands for the whole team."""
    n = positions.shape[0]
    if template.n != n:
        raise MissingTemplate(
            f"template defines {template.n} slots for {n} robots"
        )
    ref_pos, ref_vel, ref_acc = reference(t)

    deg = 1.0 + w.sum(axis=1)  # self + perceived neighbors
    slot_pts = positions - template.offsets
    anchor_pos = (slot_pts + w @ slot_pts) / deg[:, None]
    anchor_vel = (velocities + w @ velocities) / deg[:, None]

    a = (
        ref_acc[None, :]
        + gains.k_p * (ref_pos[None, :] - anchor_pos)
        + gains.k_v * (ref_vel[None, :] - anchor_vel)
    )
    a = np.clip(a, -gains.clamp, gains.clamp)

    edge = positions[:, None, :] - positions[None, :, :]  # (n, n, 3)
    length = np.sqrt(np.einsum("ijk,ijk->ij", edge, edge))
    safe = np.maximum(length, 1e-9)
    coeff = w * (1.0 - template.edge_lengths / safe)  # zero where w == 0
    a -= gains.k_edge * np.einsum("ij,ijk->ik", coeff, edge)

    dvel = velocities[:, None, :] - velocities[None, :, :]
    rate = np.einsum("ijk,ijk->ij", edge, dvel) / safe**2
    a -= gains.c_edge * np.einsum("ij,ijk->ik", w * rate, edge)

    a[:, 2] += gains.share_force / masses
    return a

"""Deterministic closed-loop runner.

Per tick: freeze the state snapshot, build observations through the
perception gate, evaluate the selected controller for every robot, apply
thrust saturation, step the physics, apply due timed events, and append a
trace record at the logging decimation.  Identical (scenario, seed) always
produces identical trace bytes: all randomness flows from the scenario seed
and the global wind process draws exactly one sample per physics step
regardless of any robot's state.

Before mission time zero the team flies a settle pre-roll of
``settle_time`` seconds against the frozen start of the reference, so every
mission begins from the corresponding equilibrium rather than the designed
taut layout.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .baselines import (
    BaselineGains,
    FormationTemplate,
    formation_based_control_batch,
    payload_leader_control_batch,
)
from .control import (
    PDGains,
    acceleration_command,
    dissipative_control_batch,
    expected_acceleration,
    invariant_set_residual,
    rest_lengths_init,
)
from .dynamics import (
    CableModel,
    StateArrays,
    WindModel,
    WorldParams,
    cable_tensions_batch,
    step,
)
from .errors import SwarmliftError
from .metrics import RunMetrics, compute_metrics
from .model import ControllerParams, PayloadState, connectivity, virtual_nodes_batch
from .presets import MatrixEntry, preset
from .scenario import (
    RunState,
    ScenarioInstance,
    ScenarioSpec,
    apply_event,
    reference_at,
    sample_instance,
    update_departures,
)
from .trace import write_trace

# Station-keeping servo for robots outside the formation (detached
# bystanders hold their start pose; departing robots chase their escape
# velocity).  Commands are desired total accelerations, so zero means hover.
HOLD_K_P = 2.0
HOLD_K_V = 3.0
HOLD_CLAMP = 6.0


@dataclass
class RunResult:
    """Everything one run produces: resolved header, records, metrics."""

    header: dict[str, Any]
    records: list[dict[str, Any]]
    metrics: RunMetrics | None


def controller_params_from(instance: ScenarioInstance) -> ControllerParams:
    """Resolve dissipative gains: dataclass defaults overridden per scenario."""
    d = ControllerParams()
    g = instance.gains
    return ControllerParams(
        k_pair=float(g.get("k_pair", d.k_pair)),
        c_pair=float(g.get("c_pair", d.c_pair)),
        k_center=float(g.get("k_center", d.k_center)),
        c_center=float(g.get("c_center", d.c_center)),
        k_leg=float(g.get("k_leg", d.k_leg)),
        c_leg=float(g.get("c_leg", d.c_leg)),
        f_c=float(g.get("f_c", d.f_c)),
        h_c=instance.h_c,
        perception_range=instance.perception_range,
    )


def pd_gains_from(instance: ScenarioInstance) -> PDGains:
    d = PDGains()
    g = instance.pd_gains
    return PDGains(
        k_p=float(g.get("k_p", d.k_p)),
        k_v=float(g.get("k_v", d.k_v)),
        clamp=float(g.get("clamp", d.clamp)),
    )


def baseline_gains_from(instance: ScenarioInstance) -> BaselineGains:
    d = BaselineGains()
    g = instance.baseline_gains
    return BaselineGains(
        k_p=float(g.get("k_p", d.k_p)),
        k_v=float(g.get("k_v", d.k_v)),
        k_edge=float(g.get("k_edge", d.k_edge)),
        c_edge=float(g.get("c_edge", d.c_edge)),
        clamp=float(g.get("clamp", d.clamp)),
        share_force=instance.share_force,
    )


def build_run_state(
    instance: ScenarioInstance,
) -> tuple[RunState, np.ndarray]:
    """Materialize the mutable run state and lock all rest lengths.

    Rest lengths are captured from the designed initial geometry of the
    *formation team* (robots attached at start); detached bystanders get
    placeholder entries that the perception gate keeps out of every command.
    Returns (run_state, l_load0) where l_load0 holds the initial
    node-to-payload distances used by the hull-combination diagnostic.
    """
    n = instance.n_robots
    attached0 = np.ones(n, dtype=bool)
    for rid in instance.initial_detached:
        attached0[rid] = False
    state = StateArrays(
        positions=instance.positions0.copy(),
        velocities=instance.velocities0.copy(),
        masses=instance.masses.copy(),
        f_max=instance.f_max.copy(),
        alive=np.ones(n, dtype=bool),
        attached=attached0,
        payload_pos=instance.payload_pos0.copy(),
        payload_vel=instance.payload_vel0.copy(),
        payload_mass=instance.payload_mass,
    )
    cables = CableModel(lengths=instance.cable_lengths.copy())
    params = controller_params_from(instance)

    nodes0, _ = virtual_nodes_batch(
        instance.positions0,
        instance.velocities0,
        instance.payload_pos0,
        instance.payload_vel0,
        instance.h_c,
    )
    team = np.flatnonzero(attached0)
    w0 = connectivity(
        instance.positions0[team], instance.perception_range
    ).w
    locked = rest_lengths_init(nodes0[team], w=w0)
    rest_pair = np.ones((n + 1, n + 1))
    idx = np.concatenate([[0], team + 1])
    rest_pair[np.ix_(idx, idx)] = locked
    params.rest_pair = rest_pair
    params.rest_leg = np.linalg.norm(nodes0 - instance.positions0, axis=1)

    template_offsets = instance.template_offsets
    if instance.controller == "leader" and instance.leader_load_anchored:
        # Offsets are designed from the reference anchor (node-plane
        # altitude); shift them to the load anchor.
        template_offsets = template_offsets + np.array(
            [0.0, 0.0, instance.h_c - instance.payload_pos0[2]]
        )
    run_state = RunState(
        state=state,
        cables=cables,
        params=params,
        pd=pd_gains_from(instance),
        bgains=baseline_gains_from(instance),
        template=FormationTemplate(offsets=template_offsets),
        wind_model=WindModel(instance.wind, instance.dt),
    )
    l_load0 = np.linalg.norm(nodes0 - instance.payload_pos0[None, :], axis=1)
    return run_state, l_load0


def _resolved_header(
    instance: ScenarioInstance, rs: RunState, l_load0: np.ndarray
) -> dict[str, Any]:
    header = instance.header_dict()
    p = rs.params
    header["gains"] = {
        "k_pair": p.k_pair, "c_pair": p.c_pair,
        "k_center": p.k_center, "c_center": p.c_center,
        "k_leg": p.k_leg, "c_leg": p.c_leg, "f_c": p.f_c,
    }
    header["pd_gains"] = {
        "k_p": rs.pd.k_p, "k_v": rs.pd.k_v, "clamp": rs.pd.clamp,
    }
    header["baseline_gains"] = {
        "k_p": rs.bgains.k_p, "k_v": rs.bgains.k_v,
        "k_edge": rs.bgains.k_edge, "c_edge": rs.bgains.c_edge,
        "clamp": rs.bgains.clamp, "share_force": rs.bgains.share_force,
    }
    header["rest_pair"] = p.rest_pair.tolist()
    header["rest_leg"] = p.rest_leg.tolist()
    header["l_load0"] = l_load0.tolist()
    return header


class _Mission:
    """One in-flight run: owns the mutable state and the tick pipeline."""

    def __init__(self, instance: ScenarioInstance):
        self.instance = instance
        self.rs, self.l_load0 = build_run_state(instance)
        self.world = WorldParams(dt=instance.dt, wind=instance.wind)
        self.gravity = self.world.gravity
        # Wind consumes the third of the four seed substreams; the first,
        # second and fourth were spent on cables/capabilities/init draws.
        ss_wind = np.random.SeedSequence(instance.seed).spawn(4)[2]
        self.rng_wind = np.random.default_rng(ss_wind)
        self.traj = instance.reference
        ref0 = reference_at(self.traj, 0.0)[0]
        self.h_c0 = instance.h_c
        self.ref_z0 = float(ref0[2])
        # The payload hangs below the node plane; report the reference in
        # payload space so tracking error compares like with like.
        self.payload_drop = instance.h_c - float(instance.payload_pos0[2])
        self.hold_positions = instance.positions0.copy()
        self.bystanders = [
            rid for rid in instance.initial_detached
            if 0 <= rid < instance.n_robots
        ]

    # -- command assembly ---------------------------------------------------
    def commands(
        self, t: float, ref: tuple[np.ndarray, np.ndarray, np.ndarray]
    ) -> tuple[np.ndarray, dict[str, Any]]:
        """Evaluate every robot's controller on the frozen snapshot at t."""
        rs, inst = self.rs, self.instance
        st = rs.state
        # Only cable-attached robots project a virtual node, so only they
        # participate in the cooperative terms; a detached robot is invisible
        # to the team law even while it remains inside perception range.
        w = connectivity(
            st.positions, rs.params.perception_range, st.alive & st.attached
        ).w
        tensions = cable_tensions_batch(
            st.positions, st.velocities, st.payload_pos, st.payload_vel,
            rs.cables, st.attached & st.alive,
        )
        nodes, node_vels = virtual_nodes_batch(
            st.positions, st.velocities, st.payload_pos, st.payload_vel,
            rs.params.h_c,
        )
        ref_p, ref_v, ref_a = ref

        if inst.controller == "dissipative":
            u, center_pos, center_vel = dissipative_control_batch(
                st.positions, st.velocities, st.payload_pos, st.payload_vel,
                tensions, st.masses, w, rs.params, self.gravity,
                nodes=nodes, node_vels=node_vels,
            )
            a_exp = expected_acceleration(
                ref_p, ref_v, ref_a, center_pos, center_vel, rs.pd
            )
            cmd = acceleration_command(a_exp, u, tensions, st.masses,
                                       self.gravity)
        else:
            deg = 1.0 + w.sum(axis=1)
            center_pos = (nodes + w @ nodes) / deg[:, None]
            center_vel = (node_vels + w @ node_vels) / deg[:, None]
            frozen_ref = lambda _t: ref  # noqa: E731 - already evaluated at t
            if inst.controller == "formation":
                cmd = formation_based_control_batch(
                    st.positions, st.velocities, st.masses, w, rs.template,
                    frozen_ref, t, rs.bgains,
                )
            else:  # leader
                load = PayloadState(position=st.payload_pos,
                                    velocity=st.payload_vel,
                                    mass=st.payload_mass)
                cmd = payload_leader_control_batch(
                    load, rs.template, frozen_ref, t, rs.bgains,
                    st.positions, st.velocities, st.masses,
                    load_anchored=inst.leader_load_anchored,
                )

        # Overrides: robots outside the formation fly their own servos.
        for rid in self.bystanders:
            if st.alive[rid] and rid not in rs.departing:
                a = HOLD_K_P * (self.hold_positions[rid] - st.positions[rid])
                a -= HOLD_K_V * st.velocities[rid]
                cmd[rid] = np.clip(a, -HOLD_CLAMP, HOLD_CLAMP)
        for rid, direction in rs.departing.items():
            v_des = inst.escape_speed * direction
            a = HOLD_K_V * (v_des - st.velocities[rid])
            cmd[rid] = np.clip(a, -HOLD_CLAMP, HOLD_CLAMP)
        if not st.alive.all():
            cmd[~st.alive] = 0.0

        aux = {
            "w": w,
            "tensions": tensions,
            "nodes": nodes,
            "node_vels": node_vels,
            "center_pos": center_pos,
            "center_vel": center_vel,
        }
        return cmd, aux

    # -- record assembly ----------------------------------------------------
    def capture(
        self, t: float, cmd: np.ndarray, aux: dict[str, Any],
        wind_v: np.ndarray, ref_p: np.ndarray,
    ) -> dict[str, Any]:
        st = self.rs.state
        act = st.alive & st.attached
        if act.sum() >= 1:
            residual = invariant_set_residual(
                st.positions[act], st.velocities[act], aux["nodes"][act],
                aux["node_vels"][act], aux["w"][np.ix_(act, act)],
                aux["center_vel"][act],
            )
        else:
            residual = 0.0
        ref_payload = ref_p - np.array([0.0, 0.0, self.payload_drop])
        thrust_need = st.masses * np.linalg.norm(
            cmd - self.gravity[None, :], axis=1
        )
        saturated = int(np.sum(thrust_need > st.f_max))
        return {
            "t": t,
            "p": st.positions.tolist(),
            "v": st.velocities.tolist(),
            "cmd": cmd.tolist(),
            "tension": aux["tensions"].tolist(),
            "alive": st.alive.tolist(),
            "attached": st.attached.tolist(),
            "payload": {"p": st.payload_pos.tolist(),
                        "v": st.payload_vel.tolist()},
            "nodes": aux["nodes"].tolist(),
            "node_vels": aux["node_vels"].tolist(),
            "centers": aux["center_pos"].tolist(),
            "edges": np.argwhere(np.triu(aux["w"]) > 0.0).tolist(),
            "wind": wind_v.tolist(),
            "ref": ref_payload.tolist(),
            "residual": float(residual),
            "diag": {"saturated": saturated},
        }

    # -- phases ---------------------------------------------------------------
    def settle(self) -> None:
        """Pre-roll against the frozen reference start; no records, no events."""
        inst = self.instance
        ticks = int(round(inst.settle_time / inst.dt))
        ref = reference_at(self.traj, 0.0)
        for k in range(ticks):
            wind_v = self.rng_step()
            cmd, aux = self.commands(0.0, ref)
            step(self.world, self.rs.state, cmd, self.rs.cables, wind_v,
                 tick=k - ticks, tensions=aux["tensions"])
            update_departures(self.rs, inst.perception_range)

    def rng_step(self) -> np.ndarray:
        return self.rs.wind_model.step(self.rng_wind)

    def fly(self) -> list[dict[str, Any]]:
        """The mission proper: returns the decimated record list."""
        inst = self.instance
        ticks = int(round(inst.duration / inst.dt))
        events = sorted(
            enumerate(inst.events), key=lambda kv: (kv[1].time, kv[0])
        )
        ev_ptr = 0
        records: list[dict[str, Any]] = []
        dt, decim = inst.dt, inst.log_decimation
        for k in range(ticks):
            t = k * dt
            ref = reference_at(self.traj, t)
            # Node plane rides the reference altitude.
            self.rs.params.h_c = self.h_c0 + (float(ref[0][2]) - self.ref_z0)
            wind_v = self.rng_step()
            cmd, aux = self.commands(t, ref)
            want = (k % decim == 0)
            record = self.capture(t, cmd, aux, wind_v, ref[0]) if want else None
            step(self.world, self.rs.state, cmd, self.rs.cables, wind_v,
                 tick=k, tensions=aux["tensions"])
            update_departures(self.rs, inst.perception_range)
            while ev_ptr < len(events) and events[ev_ptr][1].time <= t:
                apply_event(events[ev_ptr][1], self.rs)
                ev_ptr += 1
            if record is not None:
                records.append(record)
        return records


def run(
    spec: ScenarioSpec | ScenarioInstance,
    seed: int | None = None,
    with_metrics: bool = True,
    warmup: float = 5.0,
) -> RunResult:
    """Execute one scenario end to end.

    Accepts either a declarative spec (sampled here with the optional seed
    override) or an already-resolved instance.  A zero-duration scenario
    yields a header-only result with no records and no metrics.
    """
    if isinstance(spec, ScenarioInstance):
        instance = spec
    else:
        instance = sample_instance(spec, seed=seed)
    mission = _Mission(instance)
    header = _resolved_header(instance, mission.rs, mission.l_load0)
    mission.settle()
    records = mission.fly()
    metrics = None
    if with_metrics and records:
        metrics = compute_metrics(records, header, warmup=warmup)
    return RunResult(header=header, records=records, metrics=metrics)


# ---------------------------------------------------------------------------
# Benchmark matrix
# ---------------------------------------------------------------------------
def _matrix_cell(args: tuple[str, str, int, int, str | None]) -> dict[str, Any]:
    """One (scenario, controller, repeat) cell; failures become error rows."""
    preset_name, controller, seed, repeat, trace_dir = args
    row: dict[str, Any] = {
        "scenario": preset_name,
        "controller": controller,
        "seed": seed,
        "repeat": repeat,
        "status": "ok",
        "error": "",
    }
    try:
        spec = preset(preset_name)
        spec.controller = controller
        result = run(spec, seed=seed)
        m = result.metrics
        if m is None:
            raise SwarmliftError("run produced no records")
        row.update(
            tracking_median=m.tracking_summary["median"],
            tracking_mean=m.tracking_summary["mean"],
            tracking_max=m.tracking_summary["max"],
            tracking_iqr=m.tracking_summary["iqr"],
            tension_imbalance=m.tension_summary["imbalance"],
            convergence_time=m.convergence_time,
            steady_hull_residual=m.steady_hull_residual,
            steady_combination_error=m.steady_combination_error,
            final_energy=float(m.energy_series[-1]),
        )
        if trace_dir is not None:
            name = f"{preset_name}-{controller}-seed{seed}.ndjson.gz"
            write_trace(os.path.join(trace_dir, name), result.header,
                        result.records)
    except SwarmliftError as exc:
        row["status"] = "error"
        row["error"] = str(exc).replace("\n", " ")
    return row


def run_matrix(
    entries: Sequence[MatrixEntry],
    seed_base: int | None = None,
    workers: int | None = None,
    trace_dir: str | None = None,
) -> list[dict[str, Any]]:
    """Run every (scenario, controller, seed_base + k) cell; returns rows.

    Repeat k of every cell uses seed ``seed_base + k`` (default: the
    preset's own seed), so all controllers within a repeat face the same
    drawn perturbations.  Cells are pure and run on a process pool; row
    order is the deterministic submission order regardless of completion
    order, and per-cell failures are recorded without stopping the matrix.
    """
    jobs: list[tuple[str, str, int, int, str | None]] = []
    for entry in entries:
        base = preset(entry.preset).seed if seed_base is None else seed_base
        for k in range(entry.repeats):
            jobs.append((entry.preset, entry.controller, base + k, k,
                         trace_dir))
    if workers is not None and workers <= 1:
        return [_matrix_cell(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_matrix_cell, jobs))

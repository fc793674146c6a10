"""Randomized property suites for the physics and kinematics invariants.

Each class pins one invariant the rest of the system leans on: virtual
nodes always land on the designed altitude plane, cables only ever pull,
cable impulses cancel pairwise in the total momentum, saturated thrust
never exceeds the ceiling, and the analytic node velocity agrees with a
finite-difference probe of the node position.
"""
from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from swarmlift.dynamics import (
    CableModel,
    StateArrays,
    WorldParams,
    cable_tension,
    cable_tensions_batch,
    saturate_thrust,
    saturate_thrust_batch,
    step,
)
from swarmlift.model import (
    connectivity,
    virtual_node_position,
    virtual_node_velocity,
)

settings.register_profile(
    "swarmlift",
    max_examples=60,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("swarmlift")

GRAVITY = np.array([0.0, 0.0, -9.81])


def finite(lo: float, hi: float) -> st.SearchStrategy[float]:
    return st.floats(lo, hi, allow_nan=False, allow_infinity=False)


def vec3(lo: float, hi: float) -> st.SearchStrategy[tuple]:
    return st.tuples(finite(lo, hi), finite(lo, hi), finite(lo, hi))


# ===========================================================================
# Virtual-node altitude anchoring
# ===========================================================================
class TestAltitudeAnchoring:
    @given(
        xy=vec3(-50.0, 50.0),
        load=vec3(-50.0, 50.0),
        gap=finite(0.5, 30.0),
        h_c=finite(-20.0, 80.0),
    )
    def test_every_sample_lands_on_the_plane(self, xy, load, gap, h_c):
        load = np.asarray(load)
        robot = np.array([xy[0], xy[1], load[2] + gap])
        q = virtual_node_position(robot, load, h_c)
        assert abs(q[2] - h_c) <= 1e-9 * max(1.0, abs(h_c))

    @given(
        xy=vec3(-50.0, 50.0),
        load=vec3(-50.0, 50.0),
        gap=finite(0.5, 30.0),
        h_c=finite(-20.0, 80.0),
    )
    def test_node_stays_on_the_robot_payload_ray(self, xy, load, gap, h_c):
        load = np.asarray(load)
        robot = np.array([xy[0], xy[1], load[2] + gap])
        q = virtual_node_position(robot, load, h_c)
        # q - robot must be parallel to robot - load.
        cross = np.cross(q - robot, robot - load)
        scale = max(1.0, float(np.linalg.norm(q - robot)),
                    float(np.linalg.norm(robot - load)))
        assert float(np.linalg.norm(cross)) <= 1e-7 * scale * scale


# ===========================================================================
# Cable unilaterality
# ===========================================================================
class TestTensionUnilaterality:
    @given(
        rp=vec3(-10.0, 10.0),
        rv=vec3(-5.0, 5.0),
        pp=vec3(-10.0, 10.0),
        pv=vec3(-5.0, 5.0),
        length=finite(0.1, 5.0),
    )
    def test_pulls_or_releases_never_pushes(self, rp, rv, pp, pv, length):
        rp, pp = np.asarray(rp), np.asarray(pp)
        force = cable_tension(rp, np.asarray(rv), pp, np.asarray(pv), length)
        offset = rp - pp
        dist = float(np.linalg.norm(offset))
        if dist <= length:
            assert np.all(force == 0.0), "slack cable must carry zero force"
        else:
            # Any nonzero force on the robot points toward the payload.
            assert float(force @ offset) <= 1e-12

    @given(
        seed=st.integers(0, 2**31 - 1),
        n=st.integers(1, 6),
    )
    def test_batch_matches_scalar_on_random_states(self, seed, n):
        rng = np.random.default_rng(seed)
        positions = rng.uniform(-5, 5, (n, 3))
        velocities = rng.uniform(-3, 3, (n, 3))
        payload_pos = rng.uniform(-5, 5, 3)
        payload_vel = rng.uniform(-3, 3, 3)
        lengths = rng.uniform(0.2, 4.0, n)
        attached = rng.uniform(size=n) < 0.8
        cables = CableModel(lengths=lengths)
        batch = cable_tensions_batch(
            positions, velocities, payload_pos, payload_vel, cables, attached
        )
        for i in range(n):
            single = cable_tension(
                positions[i], velocities[i], payload_pos, payload_vel,
                lengths[i], cables.k_c, cables.c_c, bool(attached[i]),
            )
            np.testing.assert_allclose(batch[i], single, rtol=1e-12,
                                       atol=1e-12)


# ===========================================================================
# Newton's third law through the integrator
# ===========================================================================
class TestNewtonsThirdLaw:
    @given(
        seed=st.integers(0, 2**31 - 1),
        n=st.integers(1, 6),
    )
    def test_cable_impulses_cancel_in_total_momentum(self, seed, n):
        rng = np.random.default_rng(seed)
        payload_pos = rng.uniform(-2, 2, 3)
        positions = payload_pos + rng.uniform(-3, 3, (n, 3))
        positions[:, 2] = payload_pos[2] + rng.uniform(0.5, 4.0, n)
        masses = rng.uniform(0.5, 3.0, n)
        payload_mass = float(rng.uniform(1.0, 8.0))
        state = StateArrays(
            positions=positions,
            velocities=np.zeros((n, 3)),
            masses=masses,
            f_max=np.full(n, 1e9),  # headroom: saturation is tested elsewhere
            alive=np.ones(n, dtype=bool),
            attached=rng.uniform(size=n) < 0.8,
            payload_pos=payload_pos,
            payload_vel=np.zeros(3),
            payload_mass=payload_mass,
        )
        cables = CableModel(lengths=rng.uniform(0.2, 3.0, n))
        world = WorldParams()  # calm air: drag plays no part
        # Commanding exactly gravity makes each robot's thrust cancel its
        # weight, so any momentum change beyond payload weight comes from
        # cable force pairs failing to cancel.
        step(world, state, np.tile(GRAVITY, (n, 1)), cables, np.zeros(3))
        total = (state.masses[:, None] * state.velocities).sum(axis=0)
        total = total + state.payload_mass * state.payload_vel
        expected = (masses.sum() + payload_mass) * GRAVITY * world.dt
        np.testing.assert_allclose(total, expected, rtol=1e-9, atol=1e-12)


# ===========================================================================
# Thrust saturation bound
# ===========================================================================
class TestThrustSaturationBound:
    @given(cmd=vec3(-100.0, 100.0), mass=finite(0.2, 5.0),
           f_max=finite(1.0, 40.0))
    def test_realized_thrust_never_exceeds_the_cap(self, cmd, mass, f_max):
        realized = saturate_thrust(np.asarray(cmd), mass, f_max, GRAVITY)
        thrust = mass * float(np.linalg.norm(realized - GRAVITY))
        assert thrust <= f_max * (1.0 + 1e-12)

    @given(cmd=vec3(-100.0, 100.0), mass=finite(0.2, 5.0),
           f_max=finite(1.0, 40.0))
    def test_saturation_preserves_thrust_direction(self, cmd, mass, f_max):
        cmd = np.asarray(cmd)
        realized = saturate_thrust(cmd, mass, f_max, GRAVITY)
        want = cmd - GRAVITY
        got = realized - GRAVITY
        if mass * float(np.linalg.norm(want)) <= f_max:
            np.testing.assert_array_equal(realized, cmd)
        else:
            cross = np.cross(want, got)
            assert float(np.linalg.norm(cross)) <= 1e-9 * float(
                np.linalg.norm(want)
            ) * max(1.0, float(np.linalg.norm(got)))
            assert float(want @ got) > 0.0

    @given(seed=st.integers(0, 2**31 - 1), n=st.integers(1, 8))
    def test_batch_matches_scalar_on_random_states(self, seed, n):
        rng = np.random.default_rng(seed)
        commands = rng.uniform(-60, 60, (n, 3))
        masses = rng.uniform(0.2, 5.0, n)
        caps = rng.uniform(1.0, 40.0, n)
        batch = saturate_thrust_batch(commands, masses, caps, GRAVITY)
        for i in range(n):
            single = saturate_thrust(commands[i], masses[i], caps[i], GRAVITY)
            np.testing.assert_allclose(batch[i], single, rtol=1e-12,
                                       atol=1e-12)


# ===========================================================================
# Node velocity vs finite difference
# ===========================================================================
class TestNodeVelocityFiniteDifference:
    @given(
        p0=vec3(-20.0, 20.0),
        v0=vec3(-3.0, 3.0),
        a0=vec3(-1.0, 1.0),
        lp0=vec3(-20.0, 20.0),
        lv0=vec3(-3.0, 3.0),
        la0=vec3(-1.0, 1.0),
        gap=finite(0.5, 8.0),
        h_c=finite(-10.0, 30.0),
    )
    def test_analytic_matches_central_difference(
        self, p0, v0, a0, lp0, lv0, la0, gap, h_c
    ):
        p0, v0, a0 = map(np.asarray, (p0, v0, a0))
        lp0, lv0, la0 = map(np.asarray, (lp0, lv0, la0))

        def load_at(tau: float) -> np.ndarray:
            return lp0 + lv0 * tau + 0.5 * la0 * tau * tau

        def robot_at(tau: float) -> np.ndarray:
            x = p0 + v0 * tau + 0.5 * a0 * tau * tau
            # Pin the altitude to ride a fixed gap above the payload so the
            # projection never degenerates inside the probe window.
            x[2] = load_at(tau)[2] + gap
            return x

        robot_vel = v0.copy()
        robot_vel[2] = lv0[2]
        h = 1e-4
        fd = (
            virtual_node_position(robot_at(h), load_at(h), h_c)
            - virtual_node_position(robot_at(-h), load_at(-h), h_c)
        ) / (2.0 * h)
        analytic = virtual_node_velocity(
            robot_at(0.0), robot_vel, load_at(0.0), lv0, h_c
        )
        np.testing.assert_allclose(analytic, fd, rtol=1e-3, atol=1e-3)


# ===========================================================================
# Connectivity relabeling equivariance
# ===========================================================================
class TestConnectivityEquivariance:
    @given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 8))
    def test_relabeling_permutes_rows_and_columns(self, seed, n):
        rng = np.random.default_rng(seed)
        positions = rng.uniform(-10, 10, (n, 3))
        r = float(rng.uniform(1.0, 15.0))
        perm = rng.permutation(n)
        base = connectivity(positions, r).w
        relabeled = connectivity(positions[perm], r).w
        np.testing.assert_array_equal(relabeled, base[np.ix_(perm, perm)])

    @given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 8))
    def test_symmetry_and_zero_diagonal(self, seed, n):
        rng = np.random.default_rng(seed)
        positions = rng.uniform(-10, 10, (n, 3))
        r = float(rng.uniform(1.0, 15.0))
        w = connectivity(positions, r).w
        np.testing.assert_array_equal(w, w.T)
        assert np.all(np.diag(w) == 0.0)
        assert set(np.unique(w)) <= {0.0, 1.0}

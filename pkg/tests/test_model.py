"""Unit tests for core types and virtual-node kinematics."""
from __future__ import annotations

import numpy as np
import numpy.testing as npt
import pytest

from swarmlift.errors import DegenerateAltitude
from swarmlift.model import (
    connectivity,
    horizontal,
    lever_ratio,
    lever_ratio_batch,
    virtual_node_position,
    virtual_node_velocity,
    virtual_nodes_batch,
)


# ---------------------------------------------------------------------------
# Oracle: central finite difference of the node-position map.  Used to derive
# the frozen velocity values below and kept here as a cross-check.
# ---------------------------------------------------------------------------
def fd_node_velocity(xr, vr, xp, vp, h_c, h=1e-7):
    def at(t):
        return virtual_node_position(xr + t * vr, xp + t * vp, h_c)

    return (at(h) - at(-h)) / (2.0 * h)


# ===========================================================================
# Node position
# ===========================================================================
class TestVirtualNodePosition:
    def test_projects_along_payload_robot_ray(self):
        q = virtual_node_position(
            np.array([1.0, 2.0, 5.0]), np.array([1.0, 2.0, 2.0]), h_c=6.0
        )
        npt.assert_allclose(q, [1.0, 2.0, 6.0], atol=1e-15)

    def test_node_altitude_equals_h_c(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            xr = rng.uniform(-5, 5, 3) + [0, 0, 10]
            xp = rng.uniform(-5, 5, 3)
            h_c = 20.0
            q = virtual_node_position(xr, xp, h_c)
            assert abs(q[2] - h_c) <= 1e-9 * max(1.0, abs(h_c))

    def test_offset_is_scaled_payload_offset(self):
        # q - x_p = (x_r - x_p) * (h_c - h_p)/(h_r - h_p)
        xr = np.array([2.0, -1.0, 4.0])
        xp = np.array([0.5, 0.5, 1.0])
        h_c = 7.0
        q = virtual_node_position(xr, xp, h_c)
        npt.assert_allclose(q - xp, (xr - xp) * (7.0 - 1.0) / (4.0 - 1.0), rtol=1e-12)

    def test_degenerate_altitude_raises(self):
        with pytest.raises(DegenerateAltitude):
            virtual_node_position(
                np.array([0.0, 0.0, 2.0]), np.array([1.0, 0.0, 2.0 + 1e-9]), h_c=5.0
            )

    def test_generic_frozen_value(self):
        # Exact fractions worked out by hand: q = (66/35, -97/70, 13/2).
        q = virtual_node_position(
            np.array([1.2, -0.7, 4.1]), np.array([0.4, 0.1, 1.3]), h_c=6.5
        )
        npt.assert_allclose(q, [66.0 / 35.0, -97.0 / 70.0, 6.5], rtol=1e-12)


# ===========================================================================
# Node velocity
# ===========================================================================
class TestVirtualNodeVelocity:
    def test_payload_still_frozen_value(self):
        # Robot translating horizontally above a stationary payload: the
        # horizontal factor is 1 + s = 4/3 (altitude rates are zero).
        qd = virtual_node_velocity(
            np.array([0.0, 0.0, 5.0]),
            np.array([1.0, 0.0, 0.0]),
            np.array([0.0, 0.0, 2.0]),
            np.array([0.0, 0.0, 0.0]),
            h_c=6.0,
        )
        npt.assert_allclose(qd, [4.0 / 3.0, 0.0, 0.0], rtol=1e-12)

    def test_rigid_translation_moves_node_with_body(self):
        qd = virtual_node_velocity(
            np.array([0.0, 0.0, 5.0]),
            np.array([1.0, 0.0, 0.0]),
            np.array([0.0, 0.0, 2.0]),
            np.array([1.0, 0.0, 0.0]),
            h_c=6.0,
        )
        npt.assert_allclose(qd, [1.0, 0.0, 0.0], atol=1e-12)

    def test_generic_frozen_value(self):
        # Exact fractions: qd = (373/490, 313/490, 0).
        qd = virtual_node_velocity(
            np.array([1.2, -0.7, 4.1]),
            np.array([0.3, 0.5, -0.2]),
            np.array([0.4, 0.1, 1.3]),
            np.array([-0.1, 0.2, 0.05]),
            h_c=6.5,
        )
        npt.assert_allclose(qd, [373.0 / 490.0, 313.0 / 490.0, 0.0], rtol=1e-12, atol=1e-15)

    def test_matches_finite_difference_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            xr = rng.uniform(-3, 3, 3) + [0, 0, 8]
            vr = rng.uniform(-2, 2, 3)
            xp = rng.uniform(-3, 3, 3)
            vp = rng.uniform(-2, 2, 3)
            h_c = 15.0
            analytic = virtual_node_velocity(xr, vr, xp, vp, h_c)
            numeric = fd_node_velocity(xr, vr, xp, vp, h_c)
            npt.assert_allclose(analytic, numeric, rtol=1e-6, atol=1e-6)

    def test_vertical_component_identically_zero(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            qd = virtual_node_velocity(
                rng.uniform(-3, 3, 3) + [0, 0, 8],
                rng.uniform(-2, 2, 3),
                rng.uniform(-3, 3, 3),
                rng.uniform(-2, 2, 3),
                h_c=12.0,
            )
            assert qd[2] == pytest.approx(0.0, abs=1e-12)


# ===========================================================================
# Batch node kinematics
# ===========================================================================
class TestVirtualNodesBatch:
    def test_matches_scalar_ops(self):
        rng = np.random.default_rng(5)
        n = 7
        pos = rng.uniform(-3, 3, (n, 3)) + [0, 0, 9]
        vel = rng.uniform(-1, 1, (n, 3))
        pp = rng.uniform(-2, 2, 3)
        pv = rng.uniform(-1, 1, 3)
        nodes, node_vels = virtual_nodes_batch(pos, vel, pp, pv, h_c=14.0)
        for i in range(n):
            npt.assert_allclose(
                nodes[i], virtual_node_position(pos[i], pp, 14.0), rtol=1e-12
            )
            npt.assert_allclose(
                node_vels[i],
                virtual_node_velocity(pos[i], vel[i], pp, pv, 14.0),
                rtol=1e-12,
                atol=1e-15,
            )


# ===========================================================================
# Lever ratio k_d
# ===========================================================================
class TestLeverRatio:
    def test_frozen_value(self):
        assert lever_ratio(payload_alt=2.0, robot_alt=5.0, h_c=6.0) == pytest.approx(0.75)

    def test_robot_on_plane_gives_unity(self):
        assert lever_ratio(1.0, 4.5, 4.5) == pytest.approx(1.0)

    def test_is_inverse_projection_scale(self):
        # x_r - x_p = k_d * (q - x_p)
        xr = np.array([2.0, 1.0, 5.0])
        xp = np.array([-1.0, 0.0, 1.5])
        h_c = 9.0
        q = virtual_node_position(xr, xp, h_c)
        k_d = lever_ratio(xp[2], xr[2], h_c)
        npt.assert_allclose(xr - xp, k_d * (q - xp), rtol=1e-12)

    def test_degenerate_plane_raises(self):
        with pytest.raises(DegenerateAltitude):
            lever_ratio(4.0, 3.0, 4.0 + 1e-9)

    def test_batch_matches_scalar(self):
        alts = np.array([3.0, 4.0, 5.5])
        out = lever_ratio_batch(1.0, alts, h_c=7.0)
        for a, o in zip(alts, out):
            assert o == pytest.approx(lever_ratio(1.0, a, 7.0))


# ===========================================================================
# Connectivity
# ===========================================================================
class TestConnectivity:
    def test_gate_at_range(self):
        pos = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [5.0, 0.0, 0.0]])
        cm = connectivity(pos, perception_range=2.5)
        expected = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=float)
        npt.assert_array_equal(cm.w, expected)

    def test_symmetric_zero_diagonal(self):
        rng = np.random.default_rng(2)
        pos = rng.uniform(-4, 4, (9, 3))
        cm = connectivity(pos, perception_range=3.0)
        npt.assert_array_equal(cm.w, cm.w.T)
        npt.assert_array_equal(np.diag(cm.w), np.zeros(9))

    def test_dead_robots_disconnected(self):
        pos = np.zeros((3, 3))
        alive = np.array([True, False, True])
        cm = connectivity(pos, perception_range=1.0, alive=alive)
        assert cm.w[0, 1] == 0.0 and cm.w[1, 2] == 0.0 and cm.w[0, 2] == 1.0

    def test_neighbors_helper(self):
        pos = np.array([[0.0, 0, 0], [1.0, 0, 0], [10.0, 0, 0]])
        cm = connectivity(pos, perception_range=2.0)
        npt.assert_array_equal(cm.neighbors(0), [1])
        npt.assert_array_equal(cm.neighbors(2), [])


class TestHorizontal:
    def test_zeroes_z_only(self):
        npt.assert_array_equal(horizontal(np.array([1.0, -2.0, 3.0])), [1.0, -2.0, 0.0])

    def test_batch_shape(self):
        arr = np.arange(12, dtype=float).reshape(4, 3)
        out = horizontal(arr)
        npt.assert_array_equal(out[:, 2], np.zeros(4))
        npt.assert_array_equal(out[:, :2], arr[:, :2])

# -*- encoding: utf-8 -*-

import numpy as np
import pytest

from linslam.core.geometry import (
    Pose2,
    Pose3,
    angles_from_rot,
    angles_jacobian,
    euler_rate_matrix,
    rot_derivatives,
    rot_from_angles,
    skew,
    wrap_angle,
    wrap_angles
)
from linslam.errors import DegenerateRotation, InvalidInput

EPS = 1e-6

def test_wrap_angle_interval():
    assert wrap_angle(np.pi + 0.1) == pytest.approx(-np.pi + 0.1)
    assert wrap_angle(np.pi) == pytest.approx(np.pi)
    assert wrap_angle(-np.pi) == pytest.approx(np.pi)
    assert wrap_angle(-3 * np.pi) == pytest.approx(np.pi)
    assert wrap_angle(7.0) == pytest.approx(7.0 - 2 * np.pi)


def test_wrap_angles_vectorized(rng):
    theta = rng.uniform(-50.0, 50.0, size = 200)
    wrapped = wrap_angles(theta)

    assert np.all(wrapped > -np.pi) and np.all(wrapped <= np.pi)
    np.testing.assert_allclose(np.sin(wrapped), np.sin(theta), atol = 1e-12)
    np.testing.assert_allclose(np.cos(wrapped), np.cos(theta), atol = 1e-12)


def test_wrap_angle_rejects_non_finite():
    with pytest.raises(InvalidInput):
        wrap_angle(float("nan"))


def test_planar_rotation():
    np.testing.assert_allclose(rot_from_angles(np.pi / 2), [[0.0, -1.0], [1.0, 0.0]], atol = 1e-15)
    np.testing.assert_allclose(angles_from_rot(rot_from_angles(2.5)), [2.5])


@pytest.mark.parametrize("angles", [(0.3, -0.4, 1.2), (-2.9, 1.3, -0.1), (3.0, 0.0, 3.0)])
def test_spatial_rotation_round_trip(angles):
    R = rot_from_angles(angles)

    np.testing.assert_allclose(R.T @ R, np.eye(3), atol = 1e-12)
    assert np.linalg.det(R) == pytest.approx(1.0)
    np.testing.assert_allclose(angles_from_rot(R), angles, atol = 1e-12)


def test_rotation_order_is_yaw_pitch_roll():
    yaw, pitch, roll = 0.4, -0.2, 0.7
    Rz = rot_from_angles([yaw, 0.0, 0.0])
    Ry = rot_from_angles([0.0, pitch, 0.0])
    Rx = rot_from_angles([0.0, 0.0, roll])
    np.testing.assert_allclose(rot_from_angles([yaw, pitch, roll]), Rz @ Ry @ Rx, atol = 1e-15)


def test_bad_angle_block():
    with pytest.raises(InvalidInput):
        rot_from_angles([0.1, 0.2])
    with pytest.raises(InvalidInput):
        angles_from_rot(np.eye(4))


def test_gimbal_lock_guard():
    R = rot_from_angles([0.2, np.pi / 2, 0.1])
    with pytest.raises(DegenerateRotation):
        angles_from_rot(R)

    # best effort extraction for importers
    assert angles_from_rot(R, guard = False).shape == (3, )


@pytest.mark.parametrize("angles", [(0.7, ), (0.3, -0.4, 1.2)])
def test_rot_derivatives_finite_difference(angles):
    angles = np.array(angles)
    derivatives = rot_derivatives(angles)

    for j in range(angles.size):
        step = np.zeros_like(angles)
        step[j] = EPS
        numeric = (rot_from_angles(angles + step) - rot_from_angles(angles - step)) / (2 * EPS)
        np.testing.assert_allclose(derivatives[j], numeric, atol = 1e-8)


@pytest.mark.parametrize("angles", [(0.7, ), (0.3, -0.4, 1.2)])
def test_angles_jacobian_finite_difference(angles):
    R = rot_from_angles(angles)
    jacobian = angles_jacobian(R)

    d = R.shape[0]
    for m in range(d * d):
        step = np.zeros(d * d)
        step[m] = EPS
        step = step.reshape(d, d)
        numeric = (angles_from_rot(R + step) - angles_from_rot(R - step)) / (2 * EPS)
        np.testing.assert_allclose(jacobian[:, m], numeric, atol = 1e-7)


def test_euler_rate_matrix_gives_body_rates():
    angles = np.array([0.3, -0.4, 1.2])
    E = euler_rate_matrix(angles)
    R = rot_from_angles(angles)

    for j in range(3):
        step = np.zeros(3)
        step[j] = EPS
        numeric = R.T @ (rot_from_angles(angles + step) - rot_from_angles(angles - step)) / (2 * EPS)
        np.testing.assert_allclose(numeric, skew(E[:, j]), atol = 1e-8)


def test_pose_value_objects():
    pose = Pose2(t = (1, 2), r = 3 * np.pi)
    assert pose.r == pytest.approx(np.pi)
    np.testing.assert_allclose(Pose2.from_array(pose.as_array()).as_array(), pose.as_array())

    with pytest.raises(InvalidInput):
        Pose2(t = (1, 2, 3), r = 0.0)
    with pytest.raises(DegenerateRotation):
        Pose3(t = (0, 0, 0), r = (0.0, np.pi / 2, 0.0))

    spatial = Pose3(t = (1, 2, 3), r = (0.1, 0.2, 0.3))
    assert spatial.as_array().shape == (6, )


def test_rotation_round_trip_over_many_angles(rng):
    planar = rng.uniform(-np.pi, np.pi, size = 1000)
    recovered = np.array([angles_from_rot(rot_from_angles(theta))[0] for theta in planar])
    np.testing.assert_allclose(wrap_angles(recovered - planar), 0.0, atol = 1e-12)

    spatial = np.column_stack([
        rng.uniform(-np.pi, np.pi, size = 1000),
        rng.uniform(-1.4, 1.4, size = 1000),
        rng.uniform(-np.pi, np.pi, size = 1000)
    ])
    for angles in spatial:
        R = rot_from_angles(angles)
        np.testing.assert_allclose(R.T @ R, np.eye(3), atol = 1e-12)
        np.testing.assert_allclose(wrap_angles(angles_from_rot(R) - angles), 0.0, atol = 1e-9)

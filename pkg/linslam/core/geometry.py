# -*- encoding: utf-8 -*-

"""
Rotation and Angle Primitives in 2D and 3D

A pose carries its orientation as a flat block of angles, one heading
in 2D and three Z-Y-X Euler angles ordered ``(yaw, pitch, roll)`` in
3D. The functions of the module convert between the angle block and
the (body to world) rotation matrix, and provide the analytic
derivatives of both conversions, which are required to propagate the
information matrix through a change of coordinate frame.

A point ``p`` given in the world frame is seen from a pose ``(t, r)``
at ``R(r).T @ (p - t)``.
"""

from dataclasses import dataclass

import numpy as np

from linslam.errors import InvalidInput, DegenerateRotation

# |R[2, 0]| must stay below this value for euler angles extraction
GIMBAL_GUARD = 1.0 - 1e-9

def _check_finite(value : np.ndarray, name : str) -> None:
    if not np.all(np.isfinite(value)):
        raise InvalidInput(f"`{name}` must be finite, got {value!r}")


def wrap_angle(theta : float) -> float:
    """
    Wrap an Angle into the Half Open Interval (-pi, pi]

    The boundary value ``-pi`` maps to ``+pi`` so that the result is
    unique for every equivalence class modulo ``2 pi``.

    .. code-block:: python

        wrap_angle(np.pi + 0.1)
        >>> -3.041592653589793

        wrap_angle(-3 * np.pi)
        >>> 3.141592653589793

    :type  theta: float
    :param theta: Any finite angle in radians.

    :rtype:  float
    :return: Equivalent angle in (-pi, pi].
    """

    _check_finite(theta, "theta")
    return float(wrap_angles(np.asarray(theta, dtype = float)))


def wrap_angles(theta : np.ndarray) -> np.ndarray:
    """Element-wise (vectorized) Variant of :func:`wrap_angle`"""

    theta = np.asarray(theta, dtype = float)
    wrapped = theta - 2.0 * np.pi * np.floor((theta + np.pi) / (2.0 * np.pi))

    # floor() sends the lower boundary to -pi, close the interval on +pi
    return np.where(wrapped <= -np.pi, wrapped + 2.0 * np.pi, wrapped)


def angle_dim(trans_dim : int) -> int:
    return 1 if trans_dim == 2 else 3


def _rz(angle : float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _ry(angle : float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _rx(angle : float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def _drz(angle : float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[-s, -c, 0.0], [c, -s, 0.0], [0.0, 0.0, 0.0]])


def _dry(angle : float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[-s, 0.0, c], [0.0, 0.0, 0.0], [-c, 0.0, -s]])


def _drx(angle : float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[0.0, 0.0, 0.0], [0.0, -s, -c], [0.0, c, -s]])


def rot_from_angles(angles : np.ndarray) -> np.ndarray:
    """
    Rotation Matrix from an Angle Block

    A block of length one (or a scalar) is a 2D heading and returns the
    ``2 x 2`` planar rotation, a block of three angles
    ``(yaw, pitch, roll)`` returns ``Rz(yaw) @ Ry(pitch) @ Rx(roll)``.

    .. code-block:: python

        rot_from_angles(np.pi / 2).round(12)
        >>> array([[ 0., -1.],
                   [ 1.,  0.]])

    :type  angles: np.ndarray
    :param angles: Scalar, ``(1,)`` or ``(3,)`` block of radians.

    :rtype:  np.ndarray
    :return: Orthonormal rotation matrix with determinant one.
    """

    angles = np.atleast_1d(np.asarray(angles, dtype = float))
    _check_finite(angles, "angles")

    if angles.shape == (1, ):
        c, s = np.cos(angles[0]), np.sin(angles[0])
        return np.array([[c, -s], [s, c]])
    elif angles.shape == (3, ):
        yaw, pitch, roll = angles
        return _rz(yaw) @ _ry(pitch) @ _rx(roll)

    raise InvalidInput(f"angle block must hold 1 or 3 values, got {angles.shape}")


def rot_derivatives(angles : np.ndarray) -> np.ndarray:
    """
    Partial Derivatives of :func:`rot_from_angles`

    :rtype:  np.ndarray
    :return: Array of shape ``(k, d, d)`` where the ``j``-th slice is
        the derivative of the rotation matrix with respect to the
        ``j``-th angle of the block.
    """

    angles = np.atleast_1d(np.asarray(angles, dtype = float))

    if angles.shape == (1, ):
        c, s = np.cos(angles[0]), np.sin(angles[0])
        return np.array([[[-s, -c], [c, -s]]])

    yaw, pitch, roll = angles
    rz, ry, rx = _rz(yaw), _ry(pitch), _rx(roll)
    return np.stack([
        _drz(yaw) @ ry @ rx,
        rz @ _dry(pitch) @ rx,
        rz @ ry @ _drx(roll)
    ])


def angles_from_rot(rotation : np.ndarray, guard : bool = True) -> np.ndarray:
    """
    Angle Block from a Rotation Matrix

    Inverse of :func:`rot_from_angles`, the returned angles are wrapped
    into (-pi, pi]. In 3D the pitch is kept strictly inside
    (-pi/2, pi/2) and the extraction is refused close to the gimbal
    lock, where yaw and roll are no longer separable.

    :type  rotation: np.ndarray
    :param rotation: ``2 x 2`` or ``3 x 3`` rotation matrix.

    :type  guard: bool
    :param guard: Raise :class:`DegenerateRotation` when
        ``|R[2, 0]| >= 1 - 1e-9``. Set to False to get a best effort
        value (used by importers, which only flag such records).

    :rtype:  np.ndarray
    :return: Angle block of shape ``(1,)`` or ``(3,)``.
    """

    rotation = np.asarray(rotation, dtype = float)

    if rotation.shape == (2, 2):
        return wrap_angles(np.array([np.arctan2(rotation[1, 0], rotation[0, 0])]))
    elif rotation.shape != (3, 3):
        raise InvalidInput(f"rotation must be 2x2 or 3x3, got {rotation.shape}")

    if guard and abs(rotation[2, 0]) >= GIMBAL_GUARD:
        raise DegenerateRotation(
            f"pitch too close to +/- pi/2 (R[2, 0] = {rotation[2, 0]:.12g})"
        )

    yaw = np.arctan2(rotation[1, 0], rotation[0, 0])
    pitch = np.arctan2(-rotation[2, 0], np.hypot(rotation[2, 1], rotation[2, 2]))
    roll = np.arctan2(rotation[2, 1], rotation[2, 2])
    return wrap_angles(np.array([yaw, pitch, roll]))


def angles_jacobian(rotation : np.ndarray) -> np.ndarray:
    """
    Derivative of :func:`angles_from_rot` w.r.t. the Matrix Entries

    The formulas differentiate the ``atan2`` expressions used by the
    extraction, so they are valid for any matrix close to a rotation,
    which is all that is needed for the chain rule through a product
    of rotations.

    :rtype:  np.ndarray
    :return: Array of shape ``(k, d * d)``, columns follow the row
        major (C order) flattening of the matrix.
    """

    rotation = np.asarray(rotation, dtype = float)

    if rotation.shape == (2, 2):
        out = np.zeros((1, 4))
        r00, r10 = rotation[0, 0], rotation[1, 0]
        den = r00 ** 2 + r10 ** 2
        out[0, 0], out[0, 2] = -r10 / den, r00 / den
        return out

    out = np.zeros((3, 9))

    # yaw = atan2(R10, R00)
    r00, r10 = rotation[0, 0], rotation[1, 0]
    den = r00 ** 2 + r10 ** 2
    out[0, 0], out[0, 3] = -r10 / den, r00 / den

    # pitch = atan2(-R20, hypot(R21, R22))
    r20, r21, r22 = rotation[2, 0], rotation[2, 1], rotation[2, 2]
    h = np.hypot(r21, r22)
    den = r20 ** 2 + h ** 2
    out[1, 6] = -h / den
    out[1, 7] = r20 * r21 / (h * den)
    out[1, 8] = r20 * r22 / (h * den)

    # roll = atan2(R21, R22)
    den = r21 ** 2 + r22 ** 2
    out[2, 7], out[2, 8] = r22 / den, -r21 / den
    return out


def euler_rate_matrix(angles : np.ndarray) -> np.ndarray:
    """
    Map Z-Y-X Euler Angle Rates to the Body Angular Velocity

    For small perturbations ``omega_body = E(angles) @ d_angles``,
    which is used to convert an information block given on the local
    rotation vector into one over the Euler angles.
    """

    _, pitch, roll = np.asarray(angles, dtype = float)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cr, sr = np.cos(roll), np.sin(roll)
    return np.array([
        [-sp, 0.0, 1.0],
        [cp * sr, cr, 0.0],
        [cp * cr, -sr, 0.0]
    ])


def skew(vector : np.ndarray) -> np.ndarray:
    x, y, z = vector
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


@dataclass(frozen = True)
class Pose2:
    """
    Planar Pose, Translation (meters) and Heading (radians)

    The heading is wrapped on construction.
    """

    t : tuple
    r : float

    def __post_init__(self) -> None:
        _check_finite(np.asarray(self.t, dtype = float), "t")
        object.__setattr__(self, "t", tuple(float(v) for v in self.t))
        object.__setattr__(self, "r", wrap_angle(self.r))

        if len(self.t) != 2:
            raise InvalidInput(f"Pose2 translation must have 2 values, got {len(self.t)}")

    def as_array(self) -> np.ndarray:
        return np.array([*self.t, self.r])

    @classmethod
    def from_array(cls, values : np.ndarray) -> "Pose2":
        return cls(t = tuple(values[:2]), r = values[2])


@dataclass(frozen = True)
class Pose3:
    """
    Spatial Pose, Translation and Z-Y-X Euler Angles (yaw, pitch, roll)

    Every angle is wrapped on construction and the pitch must lie
    strictly inside (-pi/2, pi/2).
    """

    t : tuple
    r : tuple

    def __post_init__(self) -> None:
        _check_finite(np.asarray(self.t, dtype = float), "t")
        angles = wrap_angles(np.asarray(self.r, dtype = float))

        if len(self.t) != 3 or angles.shape != (3, ):
            raise InvalidInput("Pose3 needs 3 translations and 3 angles")
        if abs(angles[1]) >= np.pi / 2:
            raise DegenerateRotation(f"pitch {angles[1]!r} outside (-pi/2, pi/2)")

        object.__setattr__(self, "t", tuple(float(v) for v in self.t))
        object.__setattr__(self, "r", tuple(float(v) for v in angles))

    def as_array(self) -> np.ndarray:
        return np.array([*self.t, *self.r])

    @classmethod
    def from_array(cls, values : np.ndarray) -> "Pose3":
        return cls(t = tuple(values[:3]), r = tuple(values[3:6]))

# -*- encoding: utf-8 -*-

"""
Closed Form Change of Coordinate Frame with Analytic Jacobians

Every re-expression of a state in another frame goes through
:func:`frame_change`, which works in three steps:

    1. the reduced state of the old frame is expanded to full
       coordinates, the frame defining entities of the old frame are
       added with their fixed coordinates (a pose at the origin,
       features on the axes);
    2. every entity is moved by the rigid motion ``(R, t)`` of the new
       frame, a point ``p`` becomes ``R.T @ (p - t)`` and a pose
       ``(t_p, r)`` becomes ``(R.T @ (t_p - t), angles(R.T @ R(r)))``;
    3. the fixed coordinates of the new frame are dropped.

The Jacobian of the whole chain w.r.t. the old reduced state is built
analytically, block by block, as a :mod:`scipy.sparse` matrix.
"""

import logging

from dataclasses import dataclass
from typing import Iterable

import numpy as np
import scipy.sparse as sps

from linslam.core.geometry import (
    rot_from_angles,
    rot_derivatives,
    angles_from_rot,
    angles_jacobian,
    skew
)
from linslam.core.sparse import SparseSymMatrix
from linslam.core.state import (
    DimensionTag,
    FeatureFrame2D,
    FeatureFrame3D,
    FrameDescriptor,
    PoseFrame,
    StateKey,
    StateVector,
    check_frame_tag
)
from linslam.errors import DegenerateFrame, InvalidInput, MissingEntity

logger = logging.getLogger(__name__)

# frame defining features closer than this are coincident (meters)
COINCIDENT_TOLERANCE = 1e-9

# |v1 x w| below this ratio of |v1| |w| means collinear features
COLLINEAR_RATIO = 1e-8

@dataclass
class _Entry:
    """Full Coordinates of an Entity and their Source Columns (-1: constant)"""

    value : np.ndarray
    columns : np.ndarray


@dataclass
class _Motion:
    """
    Rigid Motion of a Frame with its Derivatives

    ``dR[m]`` and ``dt[m]`` are the derivatives of the rotation and of
    the translation w.r.t. the ``m``-th component of ``q``, the full
    coordinates of the frame defining entities, whose source columns
    are ``q_columns``.
    """

    R : np.ndarray
    t : np.ndarray
    dR : np.ndarray
    dt : np.ndarray
    q_columns : np.ndarray


def _expand(estimate : StateVector, frame : FrameDescriptor, tag : DimensionTag) -> dict:
    entries, partial = {}, frame.partial_dims(tag)

    for key in estimate.keys:
        value, columns = estimate.value(key), estimate.indices(key)
        full = tag.pose_dim if key.is_pose else tag.feature_dim

        if value.size < full:
            if key not in partial:
                raise InvalidInput(f"short entry {key} is not a frame feature of {frame}")

            pad = full - value.size
            value = np.concatenate([value, np.zeros(pad)])
            columns = np.concatenate([columns, -np.ones(pad, dtype = np.int64)])

        entries[key] = _Entry(value, columns)

    for key in frame.entities():
        if key in entries:
            continue
        elif key in partial:
            raise MissingEntity(f"frame feature {key} of {frame} is missing from the state")

        full = tag.pose_dim if key.is_pose else tag.feature_dim
        entries[key] = _Entry(np.zeros(full), -np.ones(full, dtype = np.int64))

    return entries


def expand_state(estimate : StateVector, frame : FrameDescriptor, tag : DimensionTag) -> dict:
    """
    Full Coordinates of Every Entity, Frame Entities Included

    :rtype:  dict
    :return: Mapping of :class:`StateKey` to full coordinates, state
        entries first (state order) then the frame entities.
    """

    check_frame_tag(frame, tag)
    return {key : entry.value for key, entry in _expand(estimate, frame, tag).items()}


def _normalized(vector : np.ndarray, dvector : np.ndarray) -> tuple:
    norm = np.linalg.norm(vector)
    unit = vector / norm
    return unit, (np.eye(3) - np.outer(unit, unit)) @ dvector / norm


def _pose_motion(pose : np.ndarray, tag : DimensionTag) -> tuple:
    d, k = tag.trans_dim, tag.angle_dim
    nq = d + k

    dR = np.zeros((nq, d, d))
    dR[d:] = rot_derivatives(pose[d:])
    dt = np.zeros((nq, d))
    dt[:d] = np.eye(d)

    return rot_from_angles(pose[d:]), pose[:d].copy(), dR, dt


def _feature2d_motion(origin : np.ndarray, x_axis : np.ndarray) -> tuple:
    v = x_axis - origin
    norm2 = float(v @ v)
    if np.sqrt(norm2) < COINCIDENT_TOLERANCE:
        raise DegenerateFrame("origin and x-axis features are coincident")

    phi = np.arctan2(v[1], v[0])
    dphi = np.array([-v[1], v[0]]) / norm2

    dphi_dq = np.concatenate([-dphi, dphi])
    dR = rot_derivatives(phi)[0][None, :, :] * dphi_dq[:, None, None]
    dt = np.zeros((4, 2))
    dt[:2] = np.eye(2)

    return rot_from_angles(phi), origin.copy(), dR, dt


def _feature3d_motion(origin : np.ndarray, x_axis : np.ndarray, plane : np.ndarray) -> tuple:
    v1, w = x_axis - origin, plane - origin
    v3 = np.cross(v1, w)

    if np.linalg.norm(v1) < COINCIDENT_TOLERANCE:
        raise DegenerateFrame("origin and x-axis features are coincident")
    if np.linalg.norm(v3) < COLLINEAR_RATIO * np.linalg.norm(v1) * np.linalg.norm(w):
        raise DegenerateFrame("frame defining features are collinear")

    v2 = np.cross(v3, v1)

    eye, zero = np.eye(3), np.zeros((3, 3))
    dv1 = np.hstack([-eye, eye, zero])
    dw = np.hstack([-eye, zero, eye])
    dv3 = -skew(w) @ dv1 + skew(v1) @ dw
    dv2 = -skew(v1) @ dv3 + skew(v3) @ dv1

    u1, du1 = _normalized(v1, dv1)
    u2, du2 = _normalized(v2, dv2)
    u3, du3 = _normalized(v3, dv3)

    R = np.column_stack([u1, u2, u3])
    dR = np.stack([du1, du2, du3], axis = 1).transpose(2, 0, 1)
    dt = np.zeros((9, 3))
    dt[:3] = eye

    return R, origin.copy(), dR, dt


def _motion(frame : FrameDescriptor, entries : dict, tag : DimensionTag) -> _Motion:
    for key in frame.entities():
        if key not in entries:
            raise MissingEntity(f"entity {key} of frame {frame} is not recoverable from the state")

    q = [entries[key] for key in frame.entities()]
    if isinstance(frame, PoseFrame):
        R, t, dR, dt = _pose_motion(q[0].value, tag)
    elif isinstance(frame, FeatureFrame2D):
        R, t, dR, dt = _feature2d_motion(q[0].value, q[1].value)
    elif isinstance(frame, FeatureFrame3D):
        R, t, dR, dt = _feature3d_motion(q[0].value, q[1].value, q[2].value)
    else:
        raise InvalidInput(f"unknown frame descriptor {frame!r}")

    return _Motion(R, t, dR, dt, np.concatenate([e.columns for e in q]))


def _move_point(point : np.ndarray, motion : _Motion) -> tuple:
    delta = point - motion.t
    value = motion.R.T @ delta
    J_q = np.einsum("mij,i->jm", motion.dR, delta) - motion.R.T @ motion.dt.T
    return value, motion.R.T, J_q


def _move_pose(pose : np.ndarray, motion : _Motion, tag : DimensionTag) -> tuple:
    d, k = tag.trans_dim, tag.angle_dim

    t_new, Jt_own, Jt_q = _move_point(pose[:d], motion)

    Ra = rot_from_angles(pose[d:])
    relative = motion.R.T @ Ra
    angles = angles_from_rot(relative)
    dangles = angles_jacobian(relative)

    dRa = rot_derivatives(pose[d:])
    Ja_own = np.column_stack([dangles @ (motion.R.T @ dRa[j]).ravel() for j in range(k)])
    Ja_q = np.column_stack([
        dangles @ (motion.dR[m].T @ Ra).ravel() for m in range(motion.dR.shape[0])
    ])

    J_own = np.zeros((d + k, d + k))
    J_own[:d, :d], J_own[d:, d:] = Jt_own, Ja_own
    return np.concatenate([t_new, angles]), J_own, np.vstack([Jt_q, Ja_q])


def relative_pose(pose_i : np.ndarray, pose_j : np.ndarray, tag : DimensionTag) -> tuple:
    """
    Pose ``j`` Seen from Pose ``i`` (Odometry Prediction)

    :rtype:  tuple
    :return: The relative pose, its Jacobian w.r.t. pose ``i`` and its
        Jacobian w.r.t. pose ``j``.
    """

    R, t, dR, dt = _pose_motion(np.asarray(pose_i, dtype = float), tag)
    motion = _Motion(R, t, dR, dt, np.zeros(0, dtype = np.int64))
    value, J_j, J_i = _move_pose(np.asarray(pose_j, dtype = float), motion, tag)
    return value, J_i, J_j


def relative_point(pose : np.ndarray, point : np.ndarray, tag : DimensionTag) -> tuple:
    """
    Point Seen from a Pose (Cartesian Observation Prediction)

    :rtype:  tuple
    :return: The relative position, its Jacobian w.r.t. the pose and
        its Jacobian w.r.t. the point.
    """

    R, t, dR, dt = _pose_motion(np.asarray(pose, dtype = float), tag)
    motion = _Motion(R, t, dR, dt, np.zeros(0, dtype = np.int64))
    value, J_p, J_pose = _move_point(np.asarray(point, dtype = float), motion)
    return value, J_pose, J_p


def _retained(key : StateKey, frame : FrameDescriptor, tag : DimensionTag) -> np.ndarray:
    partial = frame.partial_dims(tag)
    if key in partial:
        return np.arange(partial[key])
    elif key in frame.entities():
        return np.zeros(0, dtype = np.int64)

    return np.arange(tag.pose_dim if key.is_pose else tag.feature_dim)


def _selection(estimate : StateVector, keys : list) -> sps.csr_matrix:
    columns = estimate.index_of(keys)
    return sps.csr_matrix(
        (np.ones(columns.size), (np.arange(columns.size), columns)),
        shape = (columns.size, estimate.dim)
    )


def frame_change(
    estimate : StateVector,
    old_frame : FrameDescriptor,
    new_frame : FrameDescriptor,
    tag : DimensionTag,
    keys : Iterable[StateKey] = None
) -> tuple:
    """
    Re-Express a State in Another Coordinate Frame

    The entities of the old frame are recovered at their fixed
    coordinates (so a map in the frame of pose ``P1`` moved into the
    frame of its pose ``P2`` gains ``P1`` and loses ``P2``), the frame
    defining entities of the new frame must be recoverable from the
    state or from the old frame.

    .. code-block:: python

        state = StateVector([(PoseKey(2), [1.0, 0.0, np.pi / 2]), (FeatureKey(7), [2.0, 0.0])], DimensionTag.D2)
        moved, jacobian = frame_change(state, PoseFrame(1), PoseFrame(2), DimensionTag.D2)
        moved.value(FeatureKey(7)).round(12)
        >>> array([ 0., -1.])

    :type  estimate: StateVector
    :param estimate: Reduced state expressed in ``old_frame``.

    :type  keys: Iterable[StateKey]
    :param keys: Output only these entries, in this order. Defaults to
        every entity not fully fixed by the new frame, in ascending
        key order (poses first).

    :raises MissingEntity: A frame entity of the new frame (or a
        requested key) is not recoverable.
    :raises DegenerateFrame: Coincident or collinear frame features.
    :raises DegenerateRotation: A resulting 3D orientation is too
        close to the gimbal lock.

    :rtype:  tuple
    :return: The new :class:`StateVector` and the sparse Jacobian
        (CSR) of the new state w.r.t. the old one.
    """

    check_frame_tag(old_frame, tag)
    check_frame_tag(new_frame, tag)

    if old_frame == new_frame:
        keys = list(estimate.keys if keys is None else keys)
        return estimate.subset(keys), _selection(estimate, keys)

    entries = _expand(estimate, old_frame, tag)
    motion = _motion(new_frame, entries, tag)

    if keys is None:
        keys = sorted(key for key in entries if _retained(key, new_frame, tag).size)
    else:
        keys = list(keys)
        for key in keys:
            if key not in entries:
                raise MissingEntity(f"{key} is not recoverable from the state")
            if not _retained(key, new_frame, tag).size:
                raise InvalidInput(f"{key} is fixed by {new_frame} and has no coordinates")

    rows, cols, vals, blocks = [], [], [], []
    offset = 0
    for key in keys:
        entry = entries[key]
        if key.is_pose:
            value, J_own, J_q = _move_pose(entry.value, motion, tag)
        else:
            value, J_own, J_q = _move_point(entry.value, motion)

        keep = _retained(key, new_frame, tag)
        blocks.append((key, value[keep]))

        for J, source in ((J_own[keep], entry.columns), (J_q[keep], motion.q_columns)):
            r, c = np.nonzero((source >= 0)[None, :] & np.ones((keep.size, 1), dtype = bool))
            rows.append(offset + r)
            cols.append(source[c])
            vals.append(J[r, c])

        offset += keep.size

    partial = {k : v for k, v in new_frame.partial_dims(tag).items() if k in keys}
    moved = StateVector(blocks, tag, partial = partial)

    jacobian = sps.coo_matrix(
        (
            np.concatenate(vals) if vals else np.zeros(0),
            (
                np.concatenate(rows) if rows else np.zeros(0, dtype = np.int64),
                np.concatenate(cols) if cols else np.zeros(0, dtype = np.int64)
            )
        ),
        shape = (moved.dim, estimate.dim)
    ).tocsr()
    jacobian.sum_duplicates()

    return moved, jacobian


def transform_map(
    estimate : StateVector,
    info : SparseSymMatrix,
    old_frame : FrameDescriptor,
    new_frame : FrameDescriptor,
    tag : DimensionTag
) -> tuple:
    """
    Move an Estimate and its Information Matrix to Another Frame

    The information is propagated as ``nabla.T @ info @ nabla`` where
    ``nabla`` is the Jacobian of the inverse transform (new to old),
    evaluated at the new estimate, with rows in the old state order.

    :rtype:  tuple
    :return: The new estimate, the new information matrix and
        ``nabla`` itself.
    """

    if old_frame == new_frame:
        return estimate, info, sps.identity(estimate.dim, format = "csr")

    moved, _ = frame_change(estimate, old_frame, new_frame, tag)
    _, nabla = frame_change(moved, new_frame, old_frame, tag, keys = estimate.keys)

    logger.debug("moved %d entries from frame %s to frame %s", len(estimate), old_frame, new_frame)
    return moved, info.congruence(nabla), nabla

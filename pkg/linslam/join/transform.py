# -*- encoding: utf-8 -*-

"""
Move a Joined Map into its Target Frame

After the linear solve the joint map is still expressed in the shared
frame of its inputs. It is moved in closed form either to the frame of
one of its poses (maps with poses) or to a frame defined by two/three
of its features (feature-only maps), and its information matrix is
propagated exactly through the Jacobian of the inverse transform.
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from linslam.core.frames import frame_change, transform_map
from linslam.core.sparse import SparseSymMatrix
from linslam.core.state import (
    DimensionTag,
    FeatureFrame,
    FrameDescriptor,
    LocalMap,
    PoseFrame,
    PoseKey,
    StateVector,
    is_feature_frame
)
from linslam.errors import InvalidInput, MissingEntity

@dataclass(frozen = True, eq = False)
class TransformJacobian:
    """
    Jacobian of the Old Estimate w.r.t. the New One

    Rows follow the old estimate, columns the new one. The information
    of the new estimate is ``nabla.T @ info_old @ nabla``.
    """

    nabla : sps.csr_matrix

    @property
    def shape(self) -> tuple:
        return self.nabla.shape

    def to_dense(self) -> np.ndarray:
        return self.nabla.toarray()


def transform_jacobian(
    estimate_new : StateVector,
    new_frame : FrameDescriptor,
    old_frame : FrameDescriptor,
    old_keys,
    tag : DimensionTag
) -> TransformJacobian:
    """Jacobian of the Inverse Frame Change, Evaluated at the New Estimate"""

    _, nabla = frame_change(estimate_new, new_frame, old_frame, tag, keys = list(old_keys))
    return TransformJacobian(sps.csr_matrix(nabla))


def transform_pose_frame(
    estimate : StateVector,
    info : SparseSymMatrix,
    old_frame : PoseFrame,
    new_pose_id : int,
    tag : DimensionTag = None
) -> LocalMap:
    """
    Re-Express a Joint Map in the Frame of one of its Poses

    Every entry is moved into the frame of the pose ``new_pose_id``,
    which leaves the state, while the old frame pose enters it at its
    position seen from the new one.

    .. code-block:: python

        # new pose at (1, 0, pi / 2), feature at (2, 0)
        local = transform_pose_frame(estimate, info, PoseFrame(1), 2)
        local.estimate.value(FeatureKey(7)).round(12)
        >>> array([ 0., -1.])

    :raises MissingEntity: The new pose is not part of the estimate.
    :raises DegenerateRotation: A 3D orientation is too close to the
        gimbal lock.
    """

    tag = tag or estimate.tag
    if not isinstance(old_frame, PoseFrame):
        raise InvalidInput(f"expected a pose frame, got {old_frame}")
    if PoseKey(new_pose_id) not in estimate and PoseFrame(new_pose_id) != old_frame:
        raise MissingEntity(f"pose {new_pose_id} is not part of the joint estimate")

    new_frame = PoseFrame(new_pose_id)
    moved, moved_info, _ = transform_map(estimate, info, old_frame, new_frame, tag)
    return LocalMap(frame = new_frame, estimate = moved, info = moved_info)


def transform_feature_frame(
    estimate : StateVector,
    info : SparseSymMatrix,
    new_frame : FeatureFrame,
    **kwargs
) -> LocalMap:
    """
    Re-Express a Joint Map in a Frame Defined by its Features

    The origin feature leaves the state, the x-axis feature keeps its
    x-coordinate and (3D) the plane feature its x, y coordinates.
    Poses, if any, are moved as rigid bodies.

    Keyword Arguments
    -----------------

        * **old_frame** (*FrameDescriptor*): Current frame of the
            estimate. Required.

    :raises DegenerateFrame: Coincident (2D) or collinear (3D)
        frame defining features.
    """

    old_frame = kwargs.get("old_frame", None)
    if old_frame is None:
        raise InvalidInput("the current frame of the estimate is required (`old_frame`)")
    if not is_feature_frame(new_frame):
        raise InvalidInput(f"expected a feature frame, got {new_frame}")

    moved, moved_info, _ = transform_map(estimate, info, old_frame, new_frame, estimate.tag)
    return LocalMap(frame = new_frame, estimate = moved, info = moved_info)

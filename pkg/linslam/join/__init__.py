# -*- encoding: utf-8 -*-

"""
Two Map Joining by Linear Least Squares

Joining two maps that share a coordinate frame is a composite of four
steps: the common pose angles of the second map are wrapped close to
those of the first one, the selection system is assembled, its normal
equations are solved once, and the fused map is moved in closed form
into its target frame (the end pose of the second map for maps with
poses, a pair/triple of common features for feature-only maps).

.. code-block:: python

    import linslam

    joined = linslam.join_two_maps(m1, m2)
    print(joined.frame, joined.estimate.dim)
"""

import itertools
import logging

import numpy as np

from linslam.core.frames import (
    COINCIDENT_TOLERANCE,
    COLLINEAR_RATIO,
    expand_state,
    transform_map
)
from linslam.core.state import (
    DimensionTag,
    FeatureFrame2D,
    FeatureFrame3D,
    FrameDescriptor,
    LocalMap,
    PoseFrame,
    StateVector
)
from linslam.errors import DegenerateCommonSet

from linslam.join.classify import (
    JoinKind,
    JoinVariant,
    classify_join,
    wrap_common_angles
)
from linslam.join.linear import (
    LinearJoinSystem,
    assemble_system,
    joint_layout,
    solve_join
)
from linslam.join.transform import (
    TransformJacobian,
    transform_feature_frame,
    transform_jacobian,
    transform_pose_frame
)

logger = logging.getLogger(__name__)

def choose_feature_frame(
    estimate : StateVector,
    frame : FrameDescriptor,
    candidates,
    tag : DimensionTag
) -> FrameDescriptor:
    """
    First Non Degenerate Feature Frame among Candidate Features

    Candidates are scanned in ascending id order, pairs (2D) or triples
    (3D) in lexicographic order, the first one that is neither
    coincident nor collinear defines the frame.

    :type  candidates: Iterable[StateKey]
    :param candidates: Feature keys recoverable from the estimate (its
        entries or the entities of its frame).

    :raises DegenerateCommonSet: No candidate set defines a frame.
    """

    positions = expand_state(estimate, frame, tag)
    features = sorted(key for key in candidates if key.is_feature)

    if tag is DimensionTag.D2:
        for origin, x_axis in itertools.combinations(features, 2):
            if np.linalg.norm(positions[x_axis] - positions[origin]) >= COINCIDENT_TOLERANCE:
                return FeatureFrame2D(origin.id, x_axis.id)
    else:
        for origin, x_axis, plane in itertools.combinations(features, 3):
            v1 = positions[x_axis] - positions[origin]
            w = positions[plane] - positions[origin]
            if np.linalg.norm(v1) < COINCIDENT_TOLERANCE:
                continue
            if np.linalg.norm(np.cross(v1, w)) >= COLLINEAR_RATIO * np.linalg.norm(v1) * np.linalg.norm(w):
                return FeatureFrame3D(origin.id, x_axis.id, plane.id)

    raise DegenerateCommonSet(f"features {[str(k) for k in features]} cannot define a frame")


def join_two_maps(m1 : LocalMap, m2 : LocalMap, target_frame : FrameDescriptor = None) -> LocalMap:
    """
    Join Two Maps Sharing a Coordinate Frame

    :type  m1, m2: LocalMap
    :param m1, m2: The maps to fuse, they must be in the same frame
        and share enough entities (see :func:`classify_join`).

    :type  target_frame: FrameDescriptor
    :param target_frame: Frame of the result. Defaults to the frame of
        the end pose of ``m2`` for maps with poses, else to the first
        non degenerate pair (2D) or triple (3D) of shared features.

    :raises NotJoinable: Not enough shared entities.
    :raises FrameMismatch: The maps are not in the same frame.
    :raises SingularSystem: The fused information is not positive
        definite.

    :rtype:  LocalMap
    :return: The fused map expressed in the target frame.
    """

    kind = classify_join(m1, m2)
    if kind.variant is not JoinVariant.FEATURE_ONLY:
        m2 = wrap_common_angles(m1, m2, kind.common)

    system = assemble_system(m1, m2, kind)
    estimate, info = solve_join(system)

    if target_frame is None:
        if kind.variant is JoinVariant.FEATURE_ONLY:
            target_frame = choose_feature_frame(estimate, m1.frame, kind.shared, m1.tag)
        else:
            target_frame = PoseFrame(m2.end_pose())

    logger.debug(
        "joined %s maps (%d + %d -> %d), target frame %s",
        kind.variant.value, m1.estimate.dim, m2.estimate.dim, estimate.dim, target_frame
    )

    if isinstance(target_frame, PoseFrame) and isinstance(m1.frame, PoseFrame):
        return transform_pose_frame(estimate, info, m1.frame, target_frame.pose_id, m1.tag)
    elif isinstance(target_frame, (FeatureFrame2D, FeatureFrame3D)):
        return transform_feature_frame(estimate, info, target_frame, old_frame = m1.frame)

    moved, moved_info, _ = transform_map(estimate, info, m1.frame, target_frame, m1.tag)
    return LocalMap(frame = target_frame, estimate = moved, info = moved_info)

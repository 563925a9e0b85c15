# -*- encoding: utf-8 -*-

"""
Decide Whether (and How) Two Maps can be Joined

Two maps can be fused by one linear least squares solve when they are
expressed in the same coordinate frame and share enough entities to
tie them together: a pose for maps with poses, two features for
planar feature-only maps and three non collinear features for spatial
feature-only maps. Frame defining entities count as shared entities.
"""

import enum
import logging

from dataclasses import dataclass

import numpy as np

from linslam.core.frames import COLLINEAR_RATIO, expand_state
from linslam.core.geometry import wrap_angles
from linslam.core.state import (
    DimensionTag,
    LocalMap,
    StateVector,
    is_feature_frame
)
from linslam.errors import (
    DegenerateCommonSet,
    FrameMismatch,
    InvalidInput,
    NotJoinable
)

logger = logging.getLogger(__name__)

class JoinVariant(enum.Enum):
    POSE_FEATURE = "pose-feature"
    POSE_ONLY = "pose-only"
    FEATURE_ONLY = "feature-only"


@dataclass(frozen = True)
class JoinKind:
    """
    Variant of a Join and the Entries Shared by Both States

    :type  common: frozenset
    :param common: Keys present in both estimates, these rows of the two
        maps observe the same columns of the joint state.

    :type  shared: frozenset
    :param shared: Common entities of the two maps including the frame
        defining ones.
    """

    variant : JoinVariant
    common : frozenset
    shared : frozenset = frozenset()


def required_features(tag : DimensionTag) -> int:
    return 2 if tag is DimensionTag.D2 else 3


def check_common_features(local : LocalMap, features : list) -> None:
    """
    Raise :class:`DegenerateCommonSet` when 3D Common Features are Collinear

    The second singular value of the centered feature positions must
    not vanish w.r.t. the first one.
    """

    if local.tag is not DimensionTag.D3:
        return

    positions = expand_state(local.estimate, local.frame, local.tag)
    points = np.array([positions[key] for key in features])
    singular = np.linalg.svd(points - points.mean(axis = 0), compute_uv = False)

    if singular[0] == 0.0 or singular[1] < COLLINEAR_RATIO * singular[0]:
        raise DegenerateCommonSet(
            f"common features {[str(k) for k in features]} are collinear"
        )


def classify_join(m1 : LocalMap, m2 : LocalMap) -> JoinKind:
    """
    Classify a Pair of Maps for Linear Joining

    The sufficiency of the shared entities is checked before the frame
    identity, so a pair that merely needs re-framing reports
    :class:`FrameMismatch` while a pair that can never be joined reports
    :class:`NotJoinable`.

    :raises InvalidInput: The maps have different dimension tags.
    :raises NotJoinable: Not enough shared entities.
    :raises DegenerateCommonSet: The 3D shared features are collinear.
    :raises FrameMismatch: The maps are not in the same frame.

    :rtype:  JoinKind
    :return: The join variant with the common and shared keys.
    """

    if m1.tag is not m2.tag:
        raise InvalidInput(f"cannot join a {m1.tag.value} map with a {m2.tag.value} map")

    shared = frozenset(m1.entity_keys() & m2.entity_keys())
    common = frozenset(set(m1.estimate.keys) & set(m2.estimate.keys))

    shared_poses = sorted(k for k in shared if k.is_pose)
    shared_features = sorted(k for k in shared if k.is_feature)
    feature_frames = is_feature_frame(m1.frame), is_feature_frame(m2.frame)

    if all(feature_frames):
        if len(shared_features) < required_features(m1.tag):
            raise NotJoinable(
                f"feature-only maps share {len(shared_features)} feature(s), "
                f"{required_features(m1.tag)} required in {m1.tag.value}"
            )
        check_common_features(m1, shared_features)
        variant = JoinVariant.FEATURE_ONLY
    elif not any(feature_frames):
        if not shared_poses:
            raise NotJoinable("maps share no pose")
        variant = JoinVariant.POSE_FEATURE if (m1.has_features() or m2.has_features()) else JoinVariant.POSE_ONLY
    else:
        # one pose framed and one feature framed map, joinable after re-framing only
        if not shared_poses and len(shared_features) < required_features(m1.tag):
            raise NotJoinable("maps share neither a pose nor enough features")
        raise FrameMismatch(f"map frames differ: {m1.frame} vs {m2.frame}")

    if m1.frame != m2.frame:
        raise FrameMismatch(f"map frames differ: {m1.frame} vs {m2.frame}")

    logger.debug("join %s: %d common entries", variant.value, len(common))
    return JoinKind(variant = variant, common = common, shared = shared)


def wrap_common_angles(m1 : LocalMap, m2 : LocalMap, common) -> LocalMap:
    """
    Shift Common Pose Angles of ``m2`` Close to those of ``m1``

    Every angle of a common pose of ``m2`` is moved by a multiple of
    ``2 pi`` so that its difference with the angle of ``m1`` lies in
    (-pi, pi], the returned map is otherwise a copy of ``m2``.

    .. code-block:: python

        # m1 heading 3.0, m2 heading -3.0
        wrap_common_angles(m1, m2, kind.common).estimate.value(PoseKey(1))[2]
        >>> 3.2831853071795862
    """

    d = m2.tag.trans_dim
    values = m2.estimate.as_array()

    for key in sorted(common):
        if not key.is_pose:
            continue

        index = m2.estimate.indices(key)[d:]
        reference = m1.estimate.value(key)[d:]
        values[index] = reference + wrap_angles(values[index] - reference)

    return m2.with_estimate(StateVector.from_array(m2.estimate, values))

# -*- encoding: utf-8 -*-

"""
Core Primitives: Geometry, State Bookkeeping and Sparse Algebra

The sub-package holds everything shared by the map building, map
joining and evaluation modules. The public names are re-exported here
and from the top level :mod:`linslam` package.
"""

from linslam.core.geometry import (
    Pose2,
    Pose3,
    wrap_angle,
    wrap_angles,
    rot_from_angles,
    rot_derivatives,
    angles_from_rot,
    angles_jacobian
)

from linslam.core.sparse import (
    SPDFactor,
    SparseSymMatrix,
    is_psd,
    solve_spd
)

from linslam.core.state import (
    DimensionTag,
    FeatureFrame,
    FeatureFrame2D,
    FeatureFrame3D,
    FeatureKey,
    FrameDescriptor,
    KeyKind,
    LocalMap,
    PoseFrame,
    PoseKey,
    StateKey,
    StateVector,
    is_feature_frame
)

from linslam.core.frames import (
    expand_state,
    frame_change,
    relative_point,
    relative_pose,
    transform_map
)

from linslam.core.optimize import (
    GaussNewtonConfig,
    GaussNewtonResult,
    gauss_newton
)

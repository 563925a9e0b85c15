# -*- encoding: utf-8 -*-

"""
Large Scale SLAM by Linear Map Joining

Local maps (built by nonlinear least squares over small chunks of
odometry and feature observations) are fused by solving one linear
least squares problem per join, the nonlinearity being confined to
closed form coordinate frame transformations. Maps can be joined
sequentially or hierarchically (divide and conquer).

.. code-block:: python

    import linslam
    from linslam.sim import ScenarioConfig, generate

    truth, chunks = generate(ScenarioConfig(poses = 50, seed = 7))
    maps = [linslam.build_local_map(c, linslam.PoseFrame(c.poses[0])) for c in chunks]
    global_map = linslam.join_divide_conquer(maps)
"""

# ? package follows https://peps.python.org/pep-0440/
__version__ = "v1.0.0.a0"

from linslam.errors import (
    DegenerateCommonSet,
    DegenerateFrame,
    DegenerateRotation,
    FrameMismatch,
    InvalidInput,
    LinSLAMError,
    MissingEntity,
    NotConverged,
    NotJoinable,
    ParseError,
    SingularMarginalization,
    SingularSystem
)

from linslam.core import (
    DimensionTag,
    FeatureFrame2D,
    FeatureFrame3D,
    FeatureKey,
    GaussNewtonConfig,
    LocalMap,
    Pose2,
    Pose3,
    PoseFrame,
    PoseKey,
    SparseSymMatrix,
    StateKey,
    StateVector,
    solve_spd,
    wrap_angle
)

from linslam.localmap import (
    Observation,
    OdometryEdge,
    RawLocalData,
    build_local_map,
    marginalize,
    reframe_map
)

from linslam.join import (
    JoinVariant,
    classify_join,
    join_two_maps,
    transform_feature_frame,
    transform_pose_frame
)

from linslam.strategy import (
    ComplexityParams,
    JoinMode,
    complexity_model,
    join_divide_conquer,
    join_sequential,
    plan_joins
)

from linslam.oracle import full_nonlinear_ls, nonlinear_join

from linslam.evaluation import (
    MetricReport,
    chi2,
    chi2_quantile,
    evaluate,
    nees,
    rmse
)

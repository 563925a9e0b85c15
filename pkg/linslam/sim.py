# -*- encoding: utf-8 -*-

"""
Synthetic Scenarios with Ground Truth

A robot follows a planar loop, a lawn-mower grid or (in 3D) stacked
rings on a sphere, observing every feature within the sensor range of
each pose. Odometry between consecutive poses and Cartesian feature
observations are corrupted by additive Gaussian noise in the
measurement frame and cut into chunks of consecutive poses sharing
their boundary pose, ready for :func:`linslam.localmap.build_local_map`.

The ground truth is expressed in the frame of pose 0. Datasets are
reproducible: the generator is a PCG64 stream seeded from
``(DATASET_VERSION, seed)``, ``DATASET_VERSION`` being bumped whenever
the generation changes.

.. code-block:: python

    from linslam.sim import ScenarioConfig, generate

    truth, chunks = generate(ScenarioConfig(poses = 50, chunk_size = 5, seed = 7))
"""

import enum
import logging

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from linslam.core.frames import frame_change, relative_point, relative_pose
from linslam.core.geometry import wrap_angles
from linslam.core.sparse import SparseSymMatrix
from linslam.core.state import (
    DimensionTag,
    FeatureFrame2D,
    FeatureFrame3D,
    FeatureKey,
    FrameDescriptor,
    LocalMap,
    PoseFrame,
    PoseKey,
    StateVector
)
from linslam.errors import InvalidInput
from linslam.io.partition import chunk_bounds
from linslam.join.classify import JoinVariant
from linslam.localmap import Observation, OdometryEdge, RawLocalData

logger = logging.getLogger(__name__)

DATASET_VERSION = 1

TRUTH_FRAME = PoseFrame(0)

class Trajectory(enum.Enum):
    LOOP = "loop"
    GRID = "grid"
    SPHERE = "sphere"


@dataclass(frozen = True)
class ScenarioConfig:
    """
    Parameters of a Synthetic Scenario

    :type  feature_density: float
    :param feature_density: Features per square meter (2D) or cubic
        meter (3D) of the region around the trajectory.

    :type  odometry_sigma: tuple
    :param odometry_sigma: Standard deviations of the odometry noise,
        translation (meters) and rotation (radians).

    :type  observation_sigma: float
    :param observation_sigma: Standard deviation of the observation
        noise (meters).

    :type  noise: bool
    :param noise: Corrupt the measurements, when False the raw data is
        exactly consistent with the ground truth while the information
        matrices still follow the configured deviations.

    :type  chunk_size: int
    :param chunk_size: Pose steps per local map chunk.
    """

    tag : DimensionTag = DimensionTag.D2
    trajectory : str = "loop"
    poses : int = 50
    step : float = 1.0
    feature_density : float = 0.1
    sensor_range : float = 4.0
    odometry_sigma : tuple = (0.05, 0.01)
    observation_sigma : float = 0.05
    seed : int = 0
    chunk_size : int = 5
    noise : bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "tag", DimensionTag.parse(self.tag))
        object.__setattr__(self, "odometry_sigma", tuple(float(s) for s in self.odometry_sigma))

        trajectory = Trajectory(self.trajectory)
        if trajectory is Trajectory.SPHERE and self.tag is not DimensionTag.D3:
            raise InvalidInput("the sphere trajectory is three dimensional")
        if self.poses < 2:
            raise InvalidInput(f"a scenario needs at least 2 poses, got {self.poses}")
        if self.chunk_size < 2:
            raise InvalidInput(f"chunk size must be >= 2, got {self.chunk_size}")
        if len(self.odometry_sigma) != 2:
            raise InvalidInput("odometry sigma needs a translation and a rotation value")

        sigmas = self.odometry_sigma + (self.observation_sigma, )
        if min(sigmas) <= 0.0:
            raise InvalidInput(f"noise deviations must be strictly positive, got {sigmas}")
        if self.step <= 0.0 or self.sensor_range <= 0.0 or self.feature_density < 0.0:
            raise InvalidInput("step and sensor range must be positive, density non negative")

    def rng(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence([DATASET_VERSION, int(self.seed)])))


def _loop(n : int, step : float) -> np.ndarray:
    radius = n * step / (2.0 * np.pi)
    angles = 2.0 * np.pi * np.arange(n) / n
    return np.column_stack([radius * np.cos(angles), radius * np.sin(angles)])


def _grid(n : int, step : float) -> np.ndarray:
    width = int(np.ceil(np.sqrt(n)))
    index = np.arange(n)
    lane, column = index // width, index % width
    column = np.where(lane % 2 == 0, column, width - 1 - column)
    return np.column_stack([column * step, lane * 2.0 * step])


def _sphere(n : int, step : float) -> np.ndarray:
    per_ring = max(3, int(np.ceil(np.sqrt(n))))
    rings = int(np.ceil(n / per_ring))
    radius = per_ring * step / (2.0 * np.pi)
    latitudes = np.linspace(-0.6, 0.6, rings) if rings > 1 else np.zeros(1)

    index = np.arange(n)
    latitude = latitudes[index // per_ring]
    angle = 2.0 * np.pi * (index % per_ring) / per_ring
    return np.column_stack([
        radius * np.cos(latitude) * np.cos(angle),
        radius * np.cos(latitude) * np.sin(angle),
        radius * np.sin(latitude)
    ])


def trajectory_poses(cfg : ScenarioConfig) -> np.ndarray:
    """
    World Poses ``(t, angles)`` of the Trajectory, one Row per Pose

    Each pose heads towards the next one (the last keeps the previous
    heading), 3D poses have no roll.
    """

    builders = {Trajectory.LOOP : _loop, Trajectory.GRID : _grid, Trajectory.SPHERE : _sphere}
    positions = builders[Trajectory(cfg.trajectory)](cfg.poses, cfg.step)
    if cfg.tag is DimensionTag.D3 and positions.shape[1] == 2:
        positions = np.column_stack([positions, np.zeros(len(positions))])

    directions = np.diff(positions, axis = 0)
    directions = np.vstack([directions, directions[-1:]])

    yaw = np.arctan2(directions[:, 1], directions[:, 0])
    if cfg.tag is DimensionTag.D2:
        return np.column_stack([positions, yaw])

    pitch = np.arctan2(-directions[:, 2], np.hypot(directions[:, 0], directions[:, 1]))
    return np.column_stack([positions, yaw, pitch, np.zeros(len(positions))])


def _in_range(poses : np.ndarray, features : np.ndarray, cfg : ScenarioConfig) -> np.ndarray:
    d = cfg.tag.trans_dim
    if not len(features):
        return np.zeros((len(poses), 0), dtype = bool)
    distance = np.linalg.norm(poses[:, None, :d] - features[None, :, :], axis = 2)
    return distance <= cfg.sensor_range


def _owners(n : int, bounds : list) -> np.ndarray:
    # a boundary pose belongs to the earlier chunk
    owner = np.zeros(n, dtype = int)
    for chunk, (first, last) in enumerate(bounds):
        owner[first + (1 if chunk else 0) : last + 1] = chunk
    return owner


def _features(poses : np.ndarray, cfg : ScenarioConfig, rng : np.random.Generator, bounds : list) -> np.ndarray:
    d = cfg.tag.trans_dim
    margin = 0.5 * cfg.sensor_range
    low, high = poses[:, :d].min(axis = 0) - margin, poses[:, :d].max(axis = 0) + margin

    measure = float(np.prod(high - low))
    count = int(round(cfg.feature_density * measure))
    features = rng.uniform(low, high, size = (count, d))

    owner = _owners(len(poses), bounds)
    for chunk in range(len(bounds)):
        visible = _in_range(poses[owner == chunk], features, cfg)
        if visible.any():
            continue

        middle = np.flatnonzero(owner == chunk)[len(np.flatnonzero(owner == chunk)) // 2]
        offset = rng.uniform(-margin, margin, size = d) / np.sqrt(d)
        features = np.vstack([features, poses[middle, :d] + offset])
        logger.warning("chunk %d observes no feature, densified with one feature near pose %d", chunk, middle)

    return features


def _information(sigmas : np.ndarray) -> np.ndarray:
    return np.diag(1.0 / np.asarray(sigmas, dtype = float) ** 2)


def generate(cfg : ScenarioConfig) -> Tuple[StateVector, List[RawLocalData]]:
    """
    Generate the Ground Truth and the Raw Data Chunks of a Scenario

    :rtype:  tuple
    :return: The ground truth (every pose but pose 0 and every feature)
        in the frame of pose 0, and the raw data chunks in pose order.
    """

    tag, rng, d = cfg.tag, cfg.rng(), cfg.tag.trans_dim
    poses = trajectory_poses(cfg)
    bounds = chunk_bounds(len(poses), cfg.chunk_size)
    features = _features(poses, cfg, rng, bounds)
    visible = _in_range(poses, features, cfg)

    trans_sigma, rot_sigma = cfg.odometry_sigma
    odometry_sigmas = np.array([trans_sigma] * d + [rot_sigma] * tag.angle_dim)
    odometry_info = _information(odometry_sigmas)
    observation_info = _information([cfg.observation_sigma] * d)
    scale = 1.0 if cfg.noise else 0.0

    odometry = []
    for k in range(len(poses) - 1):
        value, _, _ = relative_pose(poses[k], poses[k + 1], tag)
        value = value + scale * rng.normal(0.0, odometry_sigmas)
        value[d:] = wrap_angles(value[d:])
        odometry.append(OdometryEdge(k, k + 1, value, odometry_info))

    observations = []
    for k in range(len(poses)):
        for f in np.flatnonzero(visible[k]):
            value, _, _ = relative_point(poses[k], features[f], tag)
            value = value + scale * rng.normal(0.0, cfg.observation_sigma, size = d)
            observations.append(Observation(k, int(f), value, observation_info))

    owner = _owners(len(poses), bounds)
    chunks = []
    for chunk, (first, last) in enumerate(bounds):
        chunks.append(RawLocalData(
            poses = tuple(range(first, last + 1)),
            odometry = tuple(edge for edge in odometry if first <= edge.source and edge.target <= last),
            observations = tuple(obs for obs in observations if owner[obs.pose_id] == chunk),
            tag = tag
        ))

    entries = [(PoseKey(k), relative_pose(poses[0], poses[k], tag)[0]) for k in range(1, len(poses))]
    entries += [(FeatureKey(f), relative_point(poses[0], features[f], tag)[0]) for f in range(len(features))]
    truth = StateVector(entries, tag)

    logger.info(
        "scenario %s/%s: %d poses, %d features, %d observations, %d chunks (seed %d)",
        cfg.trajectory, tag.value, len(poses), len(features), len(observations), len(chunks), cfg.seed
    )
    return truth, chunks


def truth_in_frame(truth : StateVector, frame : FrameDescriptor) -> StateVector:
    """Ground Truth (Frame of Pose 0) Re-Expressed in Any Frame"""

    moved, _ = frame_change(truth, TRUTH_FRAME, frame, truth.tag)
    return moved


def truth_map(truth : StateVector) -> LocalMap:
    """Ground Truth as a Map with a Zero Information Matrix"""

    return LocalMap(frame = TRUTH_FRAME, estimate = truth, info = SparseSymMatrix.zeros(truth.dim))


def _random_truth(tag : DimensionTag, rng : np.random.Generator, poses : list, features : list) -> dict:
    d = tag.trans_dim
    values = {}
    for ident in poses:
        angles = rng.uniform(-np.pi, np.pi, size = tag.angle_dim)
        if tag is DimensionTag.D3:
            angles[1] = rng.uniform(-1.0, 1.0)
        values[PoseKey(ident)] = np.concatenate([rng.uniform(-5.0, 5.0, size = d), angles])
    for ident in features:
        values[FeatureKey(ident)] = rng.uniform(-5.0, 5.0, size = d)
    return values


def _random_map(frame : FrameDescriptor, tag : DimensionTag, truth : dict, keys : list, rng : np.random.Generator) -> LocalMap:
    d = tag.trans_dim
    partial = frame.partial_dims(tag)

    entries = []
    for key in keys:
        value = truth[key].copy()
        value = value + rng.normal(0.0, 0.05, size = value.size)
        if key.is_pose:
            value[d:] = wrap_angles(value[d:])
        entries.append((key, value))

    estimate = StateVector(entries, tag, partial = partial)
    factor = rng.normal(size = (estimate.dim, estimate.dim))
    info = factor @ factor.T / estimate.dim + 0.5 * np.eye(estimate.dim)
    return LocalMap(frame = frame, estimate = estimate, info = SparseSymMatrix.from_dense(info))


def random_joinable_pair(tag : DimensionTag, variant : JoinVariant, seed : int) -> Tuple[LocalMap, LocalMap]:
    """
    Two Random Maps, in the Same Frame, Joinable with the Given Variant

    Both estimates are noisy copies of a random configuration and carry
    random positive definite information matrices.

    .. code-block:: python

        m1, m2 = random_joinable_pair(DimensionTag.D2, JoinVariant.POSE_FEATURE, seed = 3)
        classify_join(m1, m2).variant
        >>> <JoinVariant.POSE_FEATURE: 'pose-feature'>
    """

    tag, variant = DimensionTag.parse(tag), JoinVariant(variant)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([DATASET_VERSION, 1, int(seed)])))

    if variant is JoinVariant.FEATURE_ONLY:
        if tag is DimensionTag.D2:
            frame = FeatureFrame2D(100, 101)
            fixed = {FeatureKey(101) : np.array([rng.uniform(1.0, 3.0)])}
        else:
            frame = FeatureFrame3D(100, 101, 102)
            fixed = {
                FeatureKey(101) : np.array([rng.uniform(1.0, 3.0)]),
                FeatureKey(102) : np.array([rng.uniform(-2.0, 2.0), rng.uniform(1.0, 3.0)])
            }

        truth = _random_truth(tag, rng, [], range(10, 13))
        truth.update(fixed)
        frame_keys = sorted(fixed)
        keys_1 = frame_keys + [FeatureKey(10), FeatureKey(11)]
        keys_2 = frame_keys + [FeatureKey(11), FeatureKey(12)]
    else:
        frame = PoseFrame(0)
        features = [] if variant is JoinVariant.POSE_ONLY else range(10, 14)
        truth = _random_truth(tag, rng, range(1, 5), features)

        keys_1 = [PoseKey(1), PoseKey(2)] + [FeatureKey(f) for f in features if f < 13]
        keys_2 = [PoseKey(2), PoseKey(3), PoseKey(4)] + [FeatureKey(f) for f in features if f > 10]

    return _random_map(frame, tag, truth, keys_1, rng), _random_map(frame, tag, truth, keys_2, rng)

# -*- encoding: utf-8 -*-

"""
Local Map Building, Re-Framing and Marginalization

A local map is the Gauss-Newton solution of a small chunk of raw
data, odometry between poses and Cartesian observations of features,
expressed in the frame of one of its poses. The functions here build
such a map, move an existing map to another coordinate frame and
remove entries from a map while keeping the marginal distribution of
the remaining ones.

Measurement models, ``R(r)`` being the body to world rotation of a
pose ``(t, r)``:

    * odometry ``i -> j``: ``(R_i.T @ (t_j - t_i), angles(R_i.T @ R_j))``
      with wrapped angle residuals;
    * observation of ``f`` from ``i``: ``R_i.T @ (f - t_i)``.
"""

import logging

from functools import partial
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np
import scipy.sparse as sps

from scipy.linalg import cho_factor, cho_solve, LinAlgError
from scipy.sparse.csgraph import connected_components

from linslam.core.frames import relative_point, relative_pose, transform_map
from linslam.core.geometry import angles_from_rot, rot_from_angles, wrap_angles
from linslam.core.optimize import GaussNewtonConfig, gauss_newton
from linslam.core.sparse import SparseSymMatrix, SPDFactor
from linslam.core.state import (
    DimensionTag,
    FeatureKey,
    FrameDescriptor,
    LocalMap,
    PoseFrame,
    PoseKey,
    StateVector,
    check_frame_tag,
    is_feature_frame
)
from linslam.errors import (
    InvalidInput,
    NotConverged,
    SingularMarginalization,
    SingularSystem
)

logger = logging.getLogger(__name__)

# removed blocks at least this large are factorized as sparse matrices
DENSE_MARGINALIZATION_LIMIT = 64

def _information_block(info : np.ndarray, size : int, name : str) -> np.ndarray:
    info = np.asarray(info, dtype = float)
    if info.shape != (size, size):
        raise InvalidInput(f"{name} information must be {size}x{size}, got {info.shape}")
    if not np.all(np.isfinite(info)):
        raise InvalidInput(f"{name} information holds non finite values")

    return 0.5 * (info + info.T)


@dataclass(frozen = True, eq = False)
class OdometryEdge:
    """Relative Pose of ``target`` Measured in the Frame of ``source``"""

    source : int
    target : int
    measurement : np.ndarray
    info : np.ndarray


@dataclass(frozen = True, eq = False)
class Observation:
    """Cartesian Position of a Feature Measured in the Observer Frame"""

    pose_id : int
    feature_id : int
    measurement : np.ndarray
    info : np.ndarray


@dataclass(frozen = True, eq = False)
class RawLocalData:
    """
    Raw Odometry and Observations of one Local Map

    :type  poses: tuple
    :param poses: Ordered pose identifiers of the chunk.

    :type  odometry: tuple
    :param odometry: Odometry edges, see :class:`OdometryEdge`.

    :type  observations: tuple
    :param observations: Feature observations, see :class:`Observation`.

    :type  tag: DimensionTag
    :param tag: Dimension of the workspace.
    """

    poses : tuple
    odometry : tuple = field(default = ())
    observations : tuple = field(default = ())
    tag : DimensionTag = DimensionTag.D2

    def __post_init__(self) -> None:
        poses = tuple(int(p) for p in self.poses)
        if not poses:
            raise InvalidInput("a local map needs at least one pose")
        if len(set(poses)) != len(poses):
            raise InvalidInput(f"duplicate pose ids in chunk: {poses}")

        known, tag = set(poses), self.tag
        odometry = []
        for edge in self.odometry:
            if edge.source not in known or edge.target not in known:
                raise InvalidInput(f"odometry {edge.source}->{edge.target} leaves the chunk")

            odometry.append(OdometryEdge(
                int(edge.source), int(edge.target),
                np.asarray(edge.measurement, dtype = float).reshape(tag.pose_dim),
                _information_block(edge.info, tag.pose_dim, "odometry")
            ))

        observations = []
        for obs in self.observations:
            if obs.pose_id not in known:
                raise InvalidInput(f"observation from pose {obs.pose_id} outside the chunk")

            observations.append(Observation(
                int(obs.pose_id), int(obs.feature_id),
                np.asarray(obs.measurement, dtype = float).reshape(tag.feature_dim),
                _information_block(obs.info, tag.feature_dim, "observation")
            ))

        object.__setattr__(self, "poses", poses)
        object.__setattr__(self, "odometry", tuple(odometry))
        object.__setattr__(self, "observations", tuple(observations))

    @property
    def feature_ids(self) -> list:
        return sorted({obs.feature_id for obs in self.observations})


def _check_connected(data : RawLocalData) -> None:
    features = data.feature_ids
    nodes = {PoseKey(p) : i for i, p in enumerate(data.poses)}
    nodes.update({FeatureKey(f) : len(data.poses) + i for i, f in enumerate(features)})

    rows, cols = [], []
    for edge in data.odometry:
        rows.append(nodes[PoseKey(edge.source)])
        cols.append(nodes[PoseKey(edge.target)])
    for obs in data.observations:
        rows.append(nodes[PoseKey(obs.pose_id)])
        cols.append(nodes[FeatureKey(obs.feature_id)])

    graph = sps.coo_matrix((np.ones(len(rows)), (rows, cols)), shape = (len(nodes), len(nodes)))
    count, _ = connected_components(graph, directed = False)
    if count > 1:
        raise InvalidInput(f"raw data graph has {count} disconnected components")


def _compose(pose : np.ndarray, relative : np.ndarray, tag : DimensionTag) -> np.ndarray:
    d = tag.trans_dim
    R = rot_from_angles(pose[d:])
    return np.concatenate([
        pose[:d] + R @ relative[:d],
        angles_from_rot(R @ rot_from_angles(relative[d:]))
    ])


def _invert(relative : np.ndarray, tag : DimensionTag) -> np.ndarray:
    d = tag.trans_dim
    R = rot_from_angles(relative[d:])
    return np.concatenate([-R.T @ relative[:d], angles_from_rot(R.T)])


def _dead_reckoning(data : RawLocalData, anchor : int) -> dict:
    tag = data.tag
    values = {PoseKey(anchor) : np.zeros(tag.pose_dim)}

    changed = True
    while changed:
        changed = False
        for edge in data.odometry:
            source, target = PoseKey(edge.source), PoseKey(edge.target)
            if source in values and target not in values:
                values[target] = _compose(values[source], edge.measurement, tag)
                changed = True
            elif target in values and source not in values:
                values[source] = _compose(values[target], _invert(edge.measurement, tag), tag)
                changed = True

    missing = [p for p in data.poses if PoseKey(p) not in values]
    if missing:
        raise InvalidInput(f"poses {missing} are not connected to pose {anchor} by odometry")

    d = tag.trans_dim
    for obs in data.observations:
        key = FeatureKey(obs.feature_id)
        if key not in values:
            pose = values[PoseKey(obs.pose_id)]
            values[key] = pose[:d] + rot_from_angles(pose[d:]) @ obs.measurement

    return values


class _LocalProblem:
    """Weighted Odometry and Observation Residuals of a Chunk"""

    def __init__(self, data : RawLocalData, anchor : int, layout : StateVector) -> None:
        self.data = data
        self.tag = data.tag
        self.anchor = PoseKey(anchor)
        self.layout = layout
        self.angles = layout.angle_indices()

    def _block(self, x : np.ndarray, key) -> np.ndarray:
        if key == self.anchor:
            return np.zeros(self.tag.pose_dim)
        return x[self.layout.slice(key)]

    def _terms(self, x : np.ndarray):
        d = self.tag.trans_dim
        for edge in self.data.odometry:
            source, target = PoseKey(edge.source), PoseKey(edge.target)
            predicted, J_source, J_target = relative_pose(
                self._block(x, source), self._block(x, target), self.tag
            )

            residual = predicted - edge.measurement
            residual[d:] = wrap_angles(residual[d:])
            yield residual, edge.info, ((source, J_source), (target, J_target))

        for obs in self.data.observations:
            pose, feature = PoseKey(obs.pose_id), FeatureKey(obs.feature_id)
            predicted, J_pose, J_feature = relative_point(
                self._block(x, pose), self._block(x, feature), self.tag
            )
            yield predicted - obs.measurement, obs.info, ((pose, J_pose), (feature, J_feature))

    def objective(self, x : np.ndarray) -> float:
        return float(sum(e @ W @ e for e, W, _ in self._terms(x)))

    def linearize(self, x : np.ndarray) -> tuple:
        rows, cols, vals = [], [], []
        gradient = np.zeros(self.layout.dim)
        value = 0.0

        for residual, W, blocks in self._terms(x):
            value += float(residual @ W @ residual)
            blocks = [(self.layout.indices(k), J) for k, J in blocks if k != self.anchor]

            for index_a, J_a in blocks:
                gradient[index_a] += J_a.T @ W @ residual
                for index_b, J_b in blocks:
                    rows.append(np.repeat(index_a, index_b.size))
                    cols.append(np.tile(index_b, index_a.size))
                    vals.append((J_a.T @ W @ J_b).ravel())

        dim = self.layout.dim
        if not vals:
            return value, sps.csc_matrix((dim, dim)), gradient

        hessian = sps.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape = (dim, dim)
        ).tocsc()
        return value, hessian, gradient

    def retract(self, x : np.ndarray, step : np.ndarray) -> np.ndarray:
        out = x + step
        out[self.angles] = wrap_angles(out[self.angles])
        return out


def build_local_map(
    data : RawLocalData,
    frame : FrameDescriptor,
    cfg : GaussNewtonConfig = None,
    **kwargs
) -> LocalMap:
    """
    Build an Optimized Local Map from Raw Data

    The poses are initialized by dead reckoning from the frame pose,
    each feature from its first observation, then the weighted squared
    residuals are minimized by Gauss-Newton with step halving. The
    information matrix of the map is ``J.T @ W @ J`` at the solution.

    A map requested in a feature frame is built in the frame of the
    first pose of the chunk and re-framed.

    .. code-block:: python

        data = RawLocalData(
            poses = (0, ),
            observations = (Observation(0, 7, np.array([1.0, 0.0]), np.eye(2)), ),
        )
        build_local_map(data, PoseFrame(0)).estimate.value(FeatureKey(7))
        >>> array([1., 0.])

    :type  data: RawLocalData
    :param data: Odometry and observations of the chunk.

    :type  frame: FrameDescriptor
    :param frame: Coordinate frame of the resulting map.

    :type  cfg: GaussNewtonConfig
    :param cfg: Iteration control, defaults to ``GaussNewtonConfig()``.

    Keyword Arguments
    -----------------

        * **strict** (*bool*): Raise :class:`NotConverged` (carrying
            the map as ``.result``) instead of returning a map flagged
            ``converged = False``. Defaults to False.

    :raises InvalidInput: The frame references entities absent from
        the data, or the data is disconnected.

    :rtype:  LocalMap
    :return: The optimized map with its convergence record.
    """

    cfg = cfg or GaussNewtonConfig()
    strict = kwargs.get("strict", False)

    tag = data.tag
    check_frame_tag(frame, tag)

    if is_feature_frame(frame):
        missing = [k for k in frame.entities() if k.id not in data.feature_ids]
        if missing:
            raise InvalidInput(f"frame features {[str(k) for k in missing]} are not observed")

        built = build_local_map(data, PoseFrame(data.poses[0]), cfg, strict = strict)
        return reframe_map(built, frame)

    if frame.pose_id not in data.poses:
        raise InvalidInput(f"frame pose {frame.pose_id} is not part of the chunk")

    _check_connected(data)
    initial = _dead_reckoning(data, frame.pose_id)

    keys = sorted(key for key in initial if key != PoseKey(frame.pose_id))
    layout = StateVector([(key, initial[key]) for key in keys], tag)
    problem = _LocalProblem(data, frame.pose_id, layout)

    free = None
    if cfg.fix_headings:
        free = np.setdiff1d(np.arange(layout.dim), problem.angles)

    result = gauss_newton(
        problem.linearize, problem.objective, problem.retract,
        layout.as_array(), cfg, free = free
    )

    local = LocalMap(
        frame = frame,
        estimate = StateVector.from_array(layout, result.x),
        info = SparseSymMatrix.from_scipy(result.hessian),
        converged = result.converged,
        iterations = result.iterations,
        objective = result.objective
    )

    logger.debug(
        "local map %s: %d poses, %d features, objective %.6g after %d iterations",
        frame, len(data.poses), len(data.feature_ids), result.objective, result.iterations
    )

    if not result.converged:
        if strict:
            raise NotConverged(
                f"local map in frame {frame} not converged in {cfg.max_iters} iterations",
                result = local
            )
        logger.warning("local map in frame %s did not converge (objective %.6g)", frame, result.objective)

    return local


def reframe_map(local : LocalMap, new_frame : FrameDescriptor) -> LocalMap:
    """
    Express a Map in Another Coordinate Frame

    The estimate is moved by the closed form frame change and the
    information matrix by ``nabla.T @ info @ nabla``, ``nabla`` being the
    Jacobian of the inverse frame change. Re-framing back recovers the
    original map up to rounding.

    :raises MissingEntity: An entity of the new frame is not part of
        the map (state or current frame).
    :raises DegenerateFrame: The new frame features are coincident or
        collinear.
    """

    if new_frame == local.frame:
        return local

    estimate, info, _ = transform_map(local.estimate, local.info, local.frame, new_frame, local.tag)
    return replace(local, frame = new_frame, estimate = estimate, info = info)


def marginalize(local : LocalMap, remove : Iterable) -> LocalMap:
    """
    Remove Entries of a Map Keeping the Marginal of the Others

    The information of the kept entries is the Schur complement
    ``I_kk - I_kr @ inv(I_rr) @ I_rk``. Small removed blocks are inverted
    by a dense Cholesky factorization, larger ones by the sparse one.

    :type  remove: Iterable[StateKey]
    :param remove: Keys to remove, an empty set returns the map
        unchanged. The short entries of frame features cannot be
        removed.

    :raises SingularMarginalization: ``I_rr`` is not invertible.
    """

    remove = set(remove)
    if not remove:
        return local

    estimate = local.estimate
    unknown = [str(k) for k in remove if k not in estimate]
    if unknown:
        raise InvalidInput(f"cannot remove {sorted(unknown)}, not part of the map")

    frame_partial = set(local.frame.partial_dims(local.tag))
    if remove & frame_partial:
        raise InvalidInput(f"frame features {sorted(map(str, remove & frame_partial))} cannot be removed")

    kept = [key for key in estimate.keys if key not in remove]
    if not kept:
        raise InvalidInput("marginalization would remove every entry of the map")

    removed = [key for key in estimate.keys if key in remove]
    index_k, index_r = estimate.index_of(kept), estimate.index_of(removed)

    full = local.info.to_scipy()
    I_kk = full[index_k][:, index_k]
    I_kr = sps.csc_matrix(full[index_k][:, index_r])
    I_rr = full[index_r][:, index_r]

    # I_rr must be invertible even when nothing is coupled with it
    if index_r.size < DENSE_MARGINALIZATION_LIMIT:
        try:
            factor = cho_factor(I_rr.toarray(), lower = True)
        except LinAlgError as err:
            raise SingularMarginalization(f"removed block is not invertible: {err}") from err
        solve = partial(cho_solve, factor)
    else:
        try:
            solve = SPDFactor(I_rr).solve
        except SingularSystem as err:
            raise SingularMarginalization(str(err)) from err

    # only the kept columns coupled with the removed entries change
    coupled = np.unique(I_kr.nonzero()[0])
    if coupled.size:
        I_cr = I_kr[coupled].toarray()
        try:
            solved = solve(I_cr.T)
        except SingularSystem as err:
            raise SingularMarginalization(str(err)) from err

        update = I_cr @ solved
        update = 0.5 * (update + update.T)
        rows, cols = np.meshgrid(coupled, coupled, indexing = "ij")
        correction = sps.coo_matrix(
            (update.ravel(), (rows.ravel(), cols.ravel())), shape = I_kk.shape
        )
        I_kk = I_kk - correction

    logger.debug("marginalized %d entries, %d kept", len(removed), len(kept))
    return replace(local, estimate = estimate.subset(kept), info = SparseSymMatrix.from_scipy(I_kk))

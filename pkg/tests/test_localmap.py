# -*- encoding: utf-8 -*-

from dataclasses import replace

import numpy as np
import pytest

from linslam.core.optimize import GaussNewtonConfig
from linslam.core.sparse import SparseSymMatrix, is_psd
from linslam.core.state import (
    DimensionTag,
    FeatureFrame2D,
    FeatureKey,
    LocalMap,
    PoseFrame,
    PoseKey,
    StateVector
)
from linslam.errors import InvalidInput, NotConverged, SingularMarginalization
from linslam.localmap import (
    Observation,
    OdometryEdge,
    RawLocalData,
    build_local_map,
    marginalize,
    reframe_map
)
from linslam.sim import ScenarioConfig, generate, truth_in_frame

D2 = DimensionTag.D2

def test_single_observation():
    data = RawLocalData(poses = (0, ), observations = (Observation(0, 7, np.array([1.0, 0.0]), np.eye(2)), ))
    local = build_local_map(data, PoseFrame(0))

    np.testing.assert_allclose(local.estimate.value(FeatureKey(7)), [1.0, 0.0])
    np.testing.assert_allclose(local.info.to_dense(), np.eye(2))
    assert local.converged and local.objective == pytest.approx(0.0)


def test_raw_data_validation():
    with pytest.raises(InvalidInput):
        RawLocalData(poses = ())
    with pytest.raises(InvalidInput):
        RawLocalData(poses = (0, 0))
    with pytest.raises(InvalidInput):
        RawLocalData(poses = (0, 1), odometry = (OdometryEdge(0, 2, np.zeros(3), np.eye(3)), ))
    with pytest.raises(InvalidInput):
        RawLocalData(poses = (0, ), observations = (Observation(0, 1, np.zeros(2), np.eye(3)), ))


def test_disconnected_data():
    data = RawLocalData(poses = (0, 1), observations = (Observation(0, 1, np.ones(2), np.eye(2)), ))
    with pytest.raises(InvalidInput):
        build_local_map(data, PoseFrame(0))
    with pytest.raises(InvalidInput):
        build_local_map(data, PoseFrame(5))


def test_exact_data_recovers_the_truth():
    truth, chunks = generate(ScenarioConfig(poses = 11, chunk_size = 5, seed = 3, noise = False))
    chunk = chunks[0]
    local = build_local_map(chunk, PoseFrame(chunk.poses[0]))

    assert local.frame == PoseFrame(0) and local.converged
    assert local.objective == pytest.approx(0.0, abs = 1e-12)
    for key, value in local.estimate.items():
        np.testing.assert_allclose(value, truth.value(key), atol = 1e-9)


def test_information_is_the_gauss_newton_hessian(noisy_scenario):
    _, chunks, maps = noisy_scenario
    local = maps[1]

    assert local.frame == PoseFrame(chunks[1].poses[0])
    assert local.objective > 0.0 and local.converged
    assert is_psd(local.info)
    assert local.info.dim == local.estimate.dim
    assert sorted(local.pose_ids()) == sorted(chunks[1].poses)


def test_end_frame_matches_reframed_start_frame(noisy_scenario):
    _, chunks, maps = noisy_scenario
    chunk = chunks[2]
    end = build_local_map(chunk, PoseFrame(chunk.poses[-1]))
    moved = reframe_map(maps[2], PoseFrame(chunk.poses[-1]))

    # the optimum does not depend on the frame it is computed in
    assert moved.estimate.keys == end.estimate.keys
    np.testing.assert_allclose(moved.estimate.as_array(), end.estimate.as_array(), atol = 1e-6)
    np.testing.assert_allclose(moved.info.to_dense(), end.info.to_dense(), rtol = 1e-4, atol = 1e-4)


def test_feature_frame_map():
    _, chunks = generate(ScenarioConfig(poses = 11, chunk_size = 5, seed = 3, feature_density = 0.3))
    chunk = chunks[0]
    first, second = chunk.feature_ids[:2]

    local = build_local_map(chunk, FeatureFrame2D(first, second))
    assert local.frame == FeatureFrame2D(first, second)
    assert local.estimate.block_dim(FeatureKey(second)) == 1
    assert PoseKey(chunk.poses[0]) in local.estimate

    with pytest.raises(InvalidInput):
        build_local_map(chunk, FeatureFrame2D(first, 10 ** 6))


def test_strict_convergence(noisy_scenario):
    _, chunks, _ = noisy_scenario
    cfg = GaussNewtonConfig(max_iters = 1)

    loose = build_local_map(chunks[0], PoseFrame(chunks[0].poses[0]), cfg)
    assert not loose.converged

    with pytest.raises(NotConverged) as err:
        build_local_map(chunks[0], PoseFrame(chunks[0].poses[0]), cfg, strict = True)
    assert isinstance(err.value.result, LocalMap)


def test_fixed_headings_keep_dead_reckoning_angles(noisy_scenario):
    _, chunks, maps = noisy_scenario
    fixed = build_local_map(chunks[0], PoseFrame(chunks[0].poses[0]), GaussNewtonConfig(fix_headings = True))

    free = maps[0]
    assert fixed.estimate.keys == free.estimate.keys
    assert fixed.objective >= free.objective - 1e-9


def test_reframe_round_trip(noisy_scenario):
    _, chunks, maps = noisy_scenario
    local = maps[0]
    assert reframe_map(local, local.frame) is local

    there = reframe_map(local, PoseFrame(chunks[0].poses[3]))
    back = reframe_map(there, local.frame)
    back_sorted = back.estimate.subset(local.estimate.keys)

    np.testing.assert_allclose(back_sorted.as_array(), local.estimate.as_array(), atol = 1e-9)
    index = back.estimate.index_of(local.estimate.keys)
    np.testing.assert_allclose(back.info.submatrix(index).to_dense(), local.info.to_dense(), rtol = 1e-6, atol = 1e-6)


def _dense_map(rng) -> LocalMap:
    estimate = StateVector([
        (PoseKey(1), [1.0, 0.0, 0.1]),
        (FeatureKey(3), [2.0, 1.0]),
        (FeatureKey(4), [0.0, 3.0])
    ], D2)
    factor = rng.normal(size = (7, 7))
    info = factor @ factor.T + np.eye(7)
    return LocalMap(frame = PoseFrame(0), estimate = estimate, info = SparseSymMatrix.from_dense(info))


def test_marginalize_schur_complement(rng):
    local = _dense_map(rng)
    dense = local.info.to_dense()

    reduced = marginalize(local, {FeatureKey(3)})
    keep, drop = np.r_[0:3, 5:7], np.r_[3:5]
    expected = dense[np.ix_(keep, keep)] - dense[np.ix_(keep, drop)] @ np.linalg.solve(dense[np.ix_(drop, drop)], dense[np.ix_(drop, keep)])

    assert reduced.estimate.keys == (PoseKey(1), FeatureKey(4))
    np.testing.assert_allclose(reduced.info.to_dense(), expected, rtol = 1e-10)
    assert marginalize(local, set()) is local


def test_marginalize_errors(rng):
    local = _dense_map(rng)
    with pytest.raises(InvalidInput):
        marginalize(local, {FeatureKey(9)})
    with pytest.raises(InvalidInput):
        marginalize(local, set(local.estimate.keys))

    estimate = StateVector([(FeatureKey(1), [0.0, 0.0]), (FeatureKey(2), [1.0, 1.0])], D2)
    coupled = np.array([
        [1.0, 0.0, 0.5, 0.0],
        [0.0, 1.0, 0.0, 0.5],
        [0.5, 0.0, 0.0, 0.0],
        [0.0, 0.5, 0.0, 0.0]
    ])
    singular = LocalMap(frame = PoseFrame(0), estimate = estimate, info = SparseSymMatrix.from_dense(coupled))
    with pytest.raises(SingularMarginalization):
        marginalize(singular, {FeatureKey(2)})


def test_marginalize_decoupled_singular_block():
    estimate = StateVector([(FeatureKey(1), [0.0, 0.0]), (FeatureKey(2), [1.0, 1.0])], D2)
    local = LocalMap(
        frame = PoseFrame(0), estimate = estimate, info = SparseSymMatrix.from_dense(np.diag([1.0, 1.0, 0.0, 0.0]))
    )
    with pytest.raises(SingularMarginalization):
        marginalize(local, {FeatureKey(2)})

    # a decoupled invertible block leaves the kept information untouched
    local = replace(local, info = SparseSymMatrix.from_dense(np.diag([1.0, 2.0, 3.0, 4.0])))
    np.testing.assert_allclose(marginalize(local, {FeatureKey(2)}).info.to_dense(), np.diag([1.0, 2.0]))


def test_marginalized_pose_map_matches_truth():
    truth, chunks = generate(ScenarioConfig(poses = 11, chunk_size = 10, seed = 1, noise = False))
    local = build_local_map(chunks[0], PoseFrame(0))

    features = set(local.estimate.features())
    poses_only = marginalize(local, features)
    assert not poses_only.estimate.features()

    expected = truth_in_frame(truth, PoseFrame(0))
    for key, value in poses_only.estimate.items():
        np.testing.assert_allclose(value, expected.value(key), atol = 1e-9)

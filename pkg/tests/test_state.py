# -*- encoding: utf-8 -*-

import numpy as np
import pytest

from linslam.core.sparse import SparseSymMatrix
from linslam.core.state import (
    DimensionTag,
    FeatureFrame2D,
    FeatureFrame3D,
    FeatureKey,
    LocalMap,
    PoseFrame,
    PoseKey,
    StateVector
)
from linslam.errors import InvalidInput, MissingEntity

D2, D3 = DimensionTag.D2, DimensionTag.D3

@pytest.fixture
def state() -> StateVector:
    return StateVector([
        (PoseKey(2), [1.0, 0.0, 0.5]),
        (FeatureKey(7), [2.0, -1.0]),
        (PoseKey(1), [0.0, 1.0, -0.5])
    ], D2)


def test_dimension_tag():
    assert DimensionTag.parse("3d") is D3
    assert DimensionTag.parse(D2) is D2
    assert (D2.pose_dim, D2.feature_dim, D3.pose_dim, D3.angle_dim) == (3, 2, 6, 3)

    with pytest.raises(InvalidInput):
        DimensionTag.parse("4D")


def test_key_order_puts_poses_first():
    keys = sorted([FeatureKey(0), PoseKey(5), PoseKey(1), FeatureKey(-1)])
    assert [str(k) for k in keys] == ["P1", "P5", "F-1", "F0"]


def test_state_layout(state):
    assert state.dim == 8 and len(state) == 3
    assert state.keys == (PoseKey(2), FeatureKey(7), PoseKey(1))
    assert state.slice(FeatureKey(7)) == slice(3, 5)
    np.testing.assert_array_equal(state.angle_indices(), [2, 7])
    np.testing.assert_array_equal(state.index_of([PoseKey(1), FeatureKey(7)]), [5, 6, 7, 3, 4])

    ordered = state.sorted()
    assert ordered.keys == (PoseKey(1), PoseKey(2), FeatureKey(7))
    np.testing.assert_array_equal(ordered.value(PoseKey(1)), [0.0, 1.0, -0.5])


def test_state_is_immutable(state):
    value = state.value(PoseKey(2))
    value[0] = 100.0
    assert state.value(PoseKey(2))[0] == 1.0

    with pytest.raises(ValueError):
        state._values[0] = 3.0


def test_state_validation():
    with pytest.raises(InvalidInput):
        StateVector([(PoseKey(1), [0.0, 1.0])], D2)
    with pytest.raises(InvalidInput):
        StateVector([(FeatureKey(1), [0.0, np.nan])], D2)
    with pytest.raises(InvalidInput):
        StateVector([(FeatureKey(1), [0.0, 1.0]), (FeatureKey(1), [0.0, 1.0])], D2)


def test_partial_entries():
    state = StateVector([(FeatureKey(2), [3.0]), (FeatureKey(5), [1.0, 2.0])], D2, partial = {FeatureKey(2) : 1})
    assert state.partial_dims() == {FeatureKey(2) : 1}
    assert StateVector.from_array(state, np.arange(3.0)).partial_dims() == {FeatureKey(2) : 1}


def test_missing_key(state):
    with pytest.raises(MissingEntity):
        state.value(PoseKey(9))
    with pytest.raises(KeyError):
        state.indices(FeatureKey(9))


def test_frame_descriptors():
    assert str(PoseFrame(5)) == "pose 5"
    assert str(FeatureFrame2D(1, 2)) == "feature2d 1 2"
    assert FeatureFrame3D(1, 2, 3).partial_dims(D3) == {FeatureKey(2) : 1, FeatureKey(3) : 2}

    with pytest.raises(InvalidInput):
        FeatureFrame2D(4, 4)
    with pytest.raises(InvalidInput):
        FeatureFrame3D(1, 2, 1)


def test_local_map_invariants(state):
    info = SparseSymMatrix.identity(state.dim)
    local = LocalMap(frame = PoseFrame(0), estimate = state, info = info)

    assert local.pose_ids() == [0, 1, 2]
    assert local.feature_ids() == [7]
    assert local.end_pose() == 2 and local.has_features()
    assert local == LocalMap(frame = PoseFrame(0), estimate = state, info = info, iterations = 7)

    # the frame pose cannot also be part of the state
    with pytest.raises(InvalidInput):
        LocalMap(frame = PoseFrame(1), estimate = state, info = info)
    with pytest.raises(InvalidInput):
        LocalMap(frame = PoseFrame(0), estimate = state, info = SparseSymMatrix.identity(3))
    with pytest.raises(InvalidInput):
        LocalMap(frame = FeatureFrame3D(1, 2, 3), estimate = state, info = info)


def test_feature_frame_map_keeps_short_entries():
    estimate = StateVector(
        [(FeatureKey(2), [3.0]), (FeatureKey(5), [1.0, 2.0])], D2, partial = {FeatureKey(2) : 1}
    )
    local = LocalMap(frame = FeatureFrame2D(1, 2), estimate = estimate, info = SparseSymMatrix.identity(3))
    assert local.feature_ids() == [1, 2, 5]

    with pytest.raises(MissingEntity):
        local.end_pose()

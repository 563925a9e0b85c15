# -*- encoding: utf-8 -*-

"""
State Vector Bookkeeping, Frame Descriptors and the Local Map

A map estimate is a flat vector of poses and features, each entry
addressed by a :class:`StateKey`. The coordinate frame of a map is
described by a :class:`FrameDescriptor`, either a pose of the map
(the pose sits at the origin and is not part of the state) or two/three
features whose positions fix the frame (their fixed coordinates are
not part of the state, the free ones are kept as short entries).
"""

import enum

from dataclasses import dataclass, field, replace
from typing import Iterable, Union

import numpy as np

from linslam.core.sparse import SparseSymMatrix
from linslam.errors import InvalidInput, MissingEntity

class DimensionTag(enum.Enum):
    """Dimension of the Workspace, Planar or Spatial"""

    D2 = "2D"
    D3 = "3D"

    @property
    def trans_dim(self) -> int:
        return 2 if self is DimensionTag.D2 else 3

    @property
    def angle_dim(self) -> int:
        return 1 if self is DimensionTag.D2 else 3

    @property
    def pose_dim(self) -> int:
        return self.trans_dim + self.angle_dim

    @property
    def feature_dim(self) -> int:
        return self.trans_dim

    @classmethod
    def parse(cls, value : str) -> "DimensionTag":
        if isinstance(value, cls):
            return value

        try:
            return cls(str(value).upper())
        except ValueError:
            raise InvalidInput(f"unknown dimension tag {value!r}, expected 2D or 3D")


class KeyKind(enum.IntEnum):
    # ? the integer value gives the canonical order, poses first
    POSE = 0
    FEATURE = 1


@dataclass(frozen = True, order = True)
class StateKey:
    """Stable Identifier of a Pose or Feature Across all Maps"""

    kind : KeyKind
    id : int

    def __str__(self) -> str:
        return f"{'P' if self.kind is KeyKind.POSE else 'F'}{self.id}"

    @property
    def is_pose(self) -> bool:
        return self.kind is KeyKind.POSE

    @property
    def is_feature(self) -> bool:
        return self.kind is KeyKind.FEATURE


def PoseKey(id : int) -> StateKey:
    return StateKey(KeyKind.POSE, int(id))


def FeatureKey(id : int) -> StateKey:
    return StateKey(KeyKind.FEATURE, int(id))


@dataclass(frozen = True)
class PoseFrame:
    """Frame Attached to a Pose, the Pose Sits at the Origin"""

    pose_id : int

    def entities(self) -> tuple:
        return (PoseKey(self.pose_id), )

    def partial_dims(self, tag : DimensionTag) -> dict:
        """Number of Free Coordinates of Each Frame Entity Kept in the State"""

        return {}

    def __str__(self) -> str:
        return f"pose {self.pose_id}"


@dataclass(frozen = True)
class FeatureFrame2D:
    """
    Planar Frame Defined by Two Features

    The origin feature sits at ``(0, 0)`` and the x-axis feature on the
    positive x-axis at ``(x, 0)``, only ``x`` is kept in the state.
    """

    origin_id : int
    x_axis_id : int

    def __post_init__(self) -> None:
        if self.origin_id == self.x_axis_id:
            raise InvalidInput("frame defining features must be distinct")

    def entities(self) -> tuple:
        return (FeatureKey(self.origin_id), FeatureKey(self.x_axis_id))

    def partial_dims(self, tag : DimensionTag) -> dict:
        return {FeatureKey(self.x_axis_id) : 1}

    def __str__(self) -> str:
        return f"feature2d {self.origin_id} {self.x_axis_id}"


@dataclass(frozen = True)
class FeatureFrame3D:
    """
    Spatial Frame Defined by Three Non Collinear Features

    The origin feature sits at ``(0, 0, 0)``, the x-axis feature at
    ``(x, 0, 0)`` and the plane feature at ``(x, y, 0)``, the state keeps
    the x-coordinate of the x-axis feature and the x, y coordinates of
    the plane feature.
    """

    origin_id : int
    x_axis_id : int
    plane_id : int

    def __post_init__(self) -> None:
        if len({self.origin_id, self.x_axis_id, self.plane_id}) != 3:
            raise InvalidInput("frame defining features must be distinct")

    def entities(self) -> tuple:
        return (FeatureKey(self.origin_id), FeatureKey(self.x_axis_id), FeatureKey(self.plane_id))

    def partial_dims(self, tag : DimensionTag) -> dict:
        return {FeatureKey(self.x_axis_id) : 1, FeatureKey(self.plane_id) : 2}

    def __str__(self) -> str:
        return f"feature3d {self.origin_id} {self.x_axis_id} {self.plane_id}"


FeatureFrame = Union[FeatureFrame2D, FeatureFrame3D]
FrameDescriptor = Union[PoseFrame, FeatureFrame2D, FeatureFrame3D]

def is_feature_frame(frame : FrameDescriptor) -> bool:
    return isinstance(frame, (FeatureFrame2D, FeatureFrame3D))


def check_frame_tag(frame : FrameDescriptor, tag : DimensionTag) -> None:
    if isinstance(frame, FeatureFrame2D) and tag is not DimensionTag.D2:
        raise InvalidInput("a 2D feature frame cannot describe a 3D map")
    if isinstance(frame, FeatureFrame3D) and tag is not DimensionTag.D3:
        raise InvalidInput("a 3D feature frame cannot describe a 2D map")


class StateVector:
    """
    Ordered Immutable Mapping of :class:`StateKey` to Value Blocks

    Pose blocks hold ``(t, angles)``, 3 values in 2D and 6 in 3D.
    Feature blocks hold the position, 2 or 3 values, except the short
    (partial) entries of frame defining features.

    :type  entries: Iterable[tuple]
    :param entries: Ordered ``(key, values)`` pairs, keys must be
        unique.

    :type  tag: DimensionTag
    :param tag: Dimension of the workspace.

    Keyword Arguments
    -----------------

        * **partial** (*dict*): Allowed short feature entries as a
            mapping of key to its number of coordinates, typically
            ``frame.partial_dims(tag)``. Defaults to ``None``, any
            feature block shorter than a full position is then
            rejected.
    """

    __slots__ = ("tag", "_keys", "_values", "_offsets", "_index")

    def __init__(self, entries : Iterable[tuple], tag : DimensionTag, **kwargs) -> None:
        partial = kwargs.get("partial", None) or {}

        keys, blocks = [], []
        for key, value in entries:
            value = np.atleast_1d(np.asarray(value, dtype = float)).ravel()

            expected = partial.get(key, tag.pose_dim if key.is_pose else tag.feature_dim)
            if value.size != expected:
                raise InvalidInput(
                    f"entry {key} has {value.size} values, expected {expected} ({tag.value})"
                )
            if not np.all(np.isfinite(value)):
                raise InvalidInput(f"entry {key} holds non finite values")

            keys.append(key)
            blocks.append(value)

        if len(set(keys)) != len(keys):
            seen, duplicates = set(), set()
            for key in keys:
                (duplicates if key in seen else seen).add(key)

            raise InvalidInput(f"duplicate state keys: {sorted(map(str, duplicates))}")

        self.tag = tag
        self._keys = tuple(keys)
        self._values = np.concatenate(blocks) if blocks else np.zeros(0)
        self._values.flags.writeable = False
        self._offsets = np.cumsum([0] + [b.size for b in blocks])
        self._index = {key : i for i, key in enumerate(keys)}

    @classmethod
    def from_array(cls, layout : "StateVector", values : np.ndarray) -> "StateVector":
        """New Vector with the Key Layout of ``layout`` and New Values"""

        values = np.asarray(values, dtype = float)
        if values.shape != (layout.dim, ):
            raise InvalidInput(f"expected {layout.dim} values, got shape {values.shape}")

        entries = [(key, values[layout.slice(key)]) for key in layout.keys]
        return cls(entries, layout.tag, partial = layout.partial_dims())

    @property
    def keys(self) -> tuple:
        return self._keys

    @property
    def dim(self) -> int:
        return int(self._offsets[-1])

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, key : StateKey) -> bool:
        return key in self._index

    def __iter__(self):
        return iter(self._keys)

    def items(self):
        for key in self._keys:
            yield key, self.value(key)

    def position(self, key : StateKey) -> int:
        try:
            return self._index[key]
        except KeyError:
            raise MissingEntity(f"{key} is not part of the state")

    def slice(self, key : StateKey) -> slice:
        i = self.position(key)
        return slice(int(self._offsets[i]), int(self._offsets[i + 1]))

    def indices(self, key : StateKey) -> np.ndarray:
        s = self.slice(key)
        return np.arange(s.start, s.stop)

    def value(self, key : StateKey) -> np.ndarray:
        return self._values[self.slice(key)].copy()

    def as_array(self) -> np.ndarray:
        return self._values.copy()

    def block_dim(self, key : StateKey) -> int:
        i = self.position(key)
        return int(self._offsets[i + 1] - self._offsets[i])

    def partial_dims(self) -> dict:
        """Keys Holding a Short Feature Block, with their Sizes"""

        return {
            key : self.block_dim(key) for key in self._keys
            if key.is_feature and self.block_dim(key) != self.tag.feature_dim
        }

    def poses(self) -> list:
        return [key for key in self._keys if key.is_pose]

    def features(self) -> list:
        return [key for key in self._keys if key.is_feature]

    def angle_indices(self) -> np.ndarray:
        """Scalar Indices of All Pose Angle Components"""

        out = [self.indices(key)[self.tag.trans_dim:] for key in self.poses()]
        return np.concatenate(out).astype(np.int64) if out else np.zeros(0, dtype = np.int64)

    def subset(self, keys : Iterable[StateKey]) -> "StateVector":
        """Vector Restricted to (and Ordered by) the Given Keys"""

        keys = list(keys)
        return StateVector(
            [(key, self.value(key)) for key in keys], self.tag,
            partial = {k : v for k, v in self.partial_dims().items() if k in keys}
        )

    def index_of(self, keys : Iterable[StateKey]) -> np.ndarray:
        """Concatenated Scalar Indices of the Given Keys"""

        out = [self.indices(key) for key in keys]
        return np.concatenate(out).astype(np.int64) if out else np.zeros(0, dtype = np.int64)

    def sorted(self) -> "StateVector":
        return self.subset(sorted(self._keys))

    def __eq__(self, other : object) -> bool:
        if not isinstance(other, StateVector):
            return NotImplemented

        return (
            self.tag is other.tag and self._keys == other._keys
            and np.array_equal(self._values, other._values)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"StateVector({self.tag.value}, {len(self)} entries, dim={self.dim})"


@dataclass(frozen = True, eq = False)
class LocalMap:
    """
    Local (or Global) Map: Estimate, Information Matrix and Frame

    :type  frame: FrameDescriptor
    :param frame: Coordinate frame of the map, its entities are not
        part of the estimate (frame features keep their free
        coordinates as short entries).

    :type  estimate: StateVector
    :param estimate: Estimate of every entry of the map.

    :type  info: SparseSymMatrix
    :param info: Information matrix (inverse covariance) of the
        estimate, same layout.

    The ``converged``, ``iterations`` and ``objective`` fields are
    recorded by the map builders and joiners, they are informative and
    do not take part in comparisons. Positive semi-definiteness of the
    information matrix is checked by the readers, not on every
    construction, see :func:`linslam.core.sparse.is_psd`.
    """

    frame : FrameDescriptor
    estimate : StateVector
    info : SparseSymMatrix
    converged : bool = field(default = True, compare = False)
    iterations : int = field(default = 0, compare = False)
    objective : float = field(default = 0.0, compare = False)

    def __post_init__(self) -> None:
        tag = self.estimate.tag
        check_frame_tag(self.frame, tag)

        if self.info.dim != self.estimate.dim:
            raise InvalidInput(
                f"information dimension {self.info.dim} != estimate dimension {self.estimate.dim}"
            )

        partial = self.frame.partial_dims(tag)
        for key in self.frame.entities():
            if key in partial:
                if key in self.estimate and self.estimate.block_dim(key) != partial[key]:
                    raise InvalidInput(f"frame feature {key} must keep {partial[key]} coordinate(s)")
            elif key in self.estimate:
                raise InvalidInput(f"frame entity {key} cannot be part of the estimate")

    @property
    def tag(self) -> DimensionTag:
        return self.estimate.tag

    @property
    def dimension_tag(self) -> DimensionTag:
        return self.estimate.tag

    def entity_keys(self) -> set:
        """Keys of the State together with the Frame Entities"""

        return set(self.estimate.keys) | set(self.frame.entities())

    def pose_ids(self) -> list:
        return sorted(key.id for key in self.entity_keys() if key.is_pose)

    def feature_ids(self) -> list:
        return sorted(key.id for key in self.entity_keys() if key.is_feature)

    def has_features(self) -> bool:
        return bool(self.feature_ids())

    def end_pose(self) -> int:
        """Highest Pose Identifier of the Map (State or Frame)"""

        ids = self.pose_ids()
        if not ids:
            raise MissingEntity("map holds no pose")

        return ids[-1]

    def with_estimate(self, estimate : StateVector) -> "LocalMap":
        return replace(self, estimate = estimate)

    def __eq__(self, other : object) -> bool:
        if not isinstance(other, LocalMap):
            return NotImplemented

        return self.frame == other.frame and self.estimate == other.estimate and self.info == other.info

    __hash__ = None

    def __repr__(self) -> str:
        return f"LocalMap({self.tag.value}, frame={self.frame}, entries={len(self.estimate)}, dim={self.estimate.dim})"

# -*- encoding: utf-8 -*-

"""
Multi Map Joining Drivers and their Complexity Model

A sequence of local maps is fused by pairwise joins, either as a left
fold (sequential joining, the running global map absorbs the next
local map) or hierarchically (divide and conquer, adjacent results are
joined level by level, an odd leftover is promoted to the next level).
Both drivers execute a :class:`JoinPlan` of exactly ``n - 1`` joins.

Before each join the two maps are brought into a shared frame by
:func:`prepare_pair`, so that maps stored in their start pose frame
can be fused as well as maps already in the end pose frame.
"""

import enum
import logging
import math
import time

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Sequence

from linslam.core.state import FrameDescriptor, LocalMap, PoseFrame
from linslam.errors import FrameMismatch, InvalidInput, NotJoinable
from linslam.join import choose_feature_frame, join_two_maps
from linslam.join.classify import required_features, check_common_features
from linslam.localmap import reframe_map

logger = logging.getLogger(__name__)

class JoinMode(enum.Enum):
    SEQUENTIAL = "seq"
    DIVIDE_CONQUER = "dc"


@dataclass(frozen = True)
class JoinStep:
    """
    One Pairwise Join of a Plan

    Slots ``0 .. n - 1`` hold the input maps, the result of the ``k``-th
    step is stored in slot ``n + k``.
    """

    level : int
    left : int
    right : int
    result : int


@dataclass(frozen = True)
class JoinPlan:
    mode : JoinMode
    n : int
    steps : tuple

    @property
    def levels(self) -> int:
        return max((step.level for step in self.steps), default = 0)

    @property
    def final_slot(self) -> int:
        return self.steps[-1].result if self.steps else 0


def plan_joins(n : int, mode : JoinMode) -> JoinPlan:
    """
    Build the Pairing Schedule of ``n`` Maps

    .. code-block:: python

        [(s.left, s.right) for s in plan_joins(5, JoinMode.DIVIDE_CONQUER).steps]
        >>> [(0, 1), (2, 3), (5, 6), (7, 4)]

    :rtype:  JoinPlan
    :return: ``n - 1`` steps, grouped by level for divide and conquer.
    """

    mode = JoinMode(mode)
    if n < 1:
        raise InvalidInput(f"at least one map is required, got {n}")

    steps, slot = [], n
    if mode is JoinMode.SEQUENTIAL:
        running = 0
        for right in range(1, n):
            steps.append(JoinStep(level = right, left = running, right = right, result = slot))
            running, slot = slot, slot + 1
    else:
        current, level = list(range(n)), 0
        while len(current) > 1:
            level += 1
            promoted = []
            for i in range(0, len(current) - 1, 2):
                steps.append(JoinStep(level = level, left = current[i], right = current[i + 1], result = slot))
                promoted.append(slot)
                slot += 1

            if len(current) % 2:
                promoted.append(current[-1])
            current = promoted

    return JoinPlan(mode = mode, n = n, steps = tuple(steps))


def _shared_frame(left : LocalMap, right : LocalMap):
    left_keys, right_keys = left.entity_keys(), right.entity_keys()
    shared = left_keys & right_keys

    if set(right.frame.entities()) <= left_keys:
        return right.frame
    if set(left.frame.entities()) <= right_keys:
        return left.frame

    poses = sorted(k for k in shared if k.is_pose)
    if poses:
        return PoseFrame(poses[0].id)

    features = sorted(k for k in shared if k.is_feature)
    if len(features) >= required_features(left.tag):
        check_common_features(left, features)
        return choose_feature_frame(left.estimate, left.frame, features, left.tag)

    raise NotJoinable(f"maps framed by {left.frame} and {right.frame} share no usable entity")


def prepare_pair(left : LocalMap, right : LocalMap) -> tuple:
    """
    Re-Frame Two Maps into a Shared Frame

    The frame of the right map is used when the left map contains its
    entities, else the frame of the left map when the right one
    contains its entities, else the frame of the lowest common pose
    (or of the first non degenerate common features).

    :raises NotJoinable: The maps share no usable entity.

    :rtype:  tuple
    :return: Both maps expressed in the shared frame.
    """

    if left.frame == right.frame:
        return left, right

    frame = _shared_frame(left, right)
    logger.debug("re-framing pair %s / %s into %s", left.frame, right.frame, frame)
    return reframe_map(left, frame), reframe_map(right, frame)


def _join_pair(left : LocalMap, right : LocalMap, target_frame : FrameDescriptor = None) -> LocalMap:
    left, right = prepare_pair(left, right)
    return join_two_maps(left, right, target_frame = target_frame)


def _run_step(index : int, step : JoinStep, slots : dict, target_frame : FrameDescriptor = None) -> LocalMap:
    try:
        return _join_pair(slots[step.left], slots[step.right], target_frame)
    except (NotJoinable, FrameMismatch) as err:
        raise NotJoinable(f"join step {index} (slots {step.left} + {step.right}): {err}", step = index) from err


def _execute(plan : JoinPlan, maps : Sequence[LocalMap], threads : int = 1, target_frame : FrameDescriptor = None) -> LocalMap:
    if len(maps) != plan.n:
        raise InvalidInput(f"plan expects {plan.n} maps, got {len(maps)}")

    slots = dict(enumerate(maps))
    if not plan.steps:
        return slots[0]

    levels = {}
    for index, step in enumerate(plan.steps):
        levels.setdefault(step.level, []).append((index, step))

    for level in sorted(levels):
        start = time.perf_counter()
        batch = levels[level]

        if threads > 1 and len(batch) > 1:
            with ThreadPoolExecutor(max_workers = threads) as executor:
                futures = [executor.submit(_run_step, index, step, slots, target_frame) for index, step in batch]
                results = [future.result() for future in futures]
        else:
            results = [_run_step(index, step, slots, target_frame) for index, step in batch]

        for (_, step), result in zip(batch, results):
            slots[step.result] = result

        logger.info(
            "%s level %d: %d join(s) in %.3f s",
            plan.mode.value, level, len(batch), time.perf_counter() - start
        )

    return slots[plan.final_slot]


def join_sequential(maps : Sequence[LocalMap], **kwargs) -> LocalMap:
    """
    Fuse Maps by a Left Fold of Pairwise Joins

    Keyword Arguments
    -----------------

        * **target_frame** (*FrameDescriptor*): Frame of every join
            result, see :func:`linslam.join.join_two_maps`. Maps already
            sharing this frame are then fused without any frame change.

    :raises NotJoinable: A pair cannot be joined, ``.step`` holds the
        index of the failing join.

    :rtype:  LocalMap
    :return: The global map, in the frame of the end pose of the last
        map for maps with poses.
    """

    maps = list(maps)
    return _execute(plan_joins(len(maps), JoinMode.SEQUENTIAL), maps, target_frame = kwargs.get("target_frame", None))


def join_divide_conquer(maps : Sequence[LocalMap], threads : int = 1, **kwargs) -> LocalMap:
    """
    Fuse Maps by Hierarchical Pairwise Joins

    Adjacent maps are joined level by level, an odd leftover map is
    promoted unchanged to the next level. The joins of a level may run
    on a pool of ``threads`` workers, the pairing (and so the result)
    does not depend on the number of workers.

    Keyword Arguments
    -----------------

        * **target_frame** (*FrameDescriptor*): As for
            :func:`join_sequential`.

    :raises NotJoinable: A pair cannot be joined, ``.step`` holds the
        index of the failing join.
    """

    maps = list(maps)
    return _execute(
        plan_joins(len(maps), JoinMode.DIVIDE_CONQUER), maps,
        threads = max(1, int(threads)), target_frame = kwargs.get("target_frame", None)
    )


@dataclass(frozen = True)
class ComplexityParams:
    """
    Size of a Mapping Problem

    :type  O_G: int
    :param O_G: Total number of odometry and feature observations.

    :type  S_G: int
    :param S_G: Total number of state entities of the global map.

    :type  m: int
    :param m: Number of nonlinear least squares iterations.

    :type  n: int
    :param n: Number of local maps.
    """

    O_G : int
    S_G : int
    m : int
    n : int

    def __post_init__(self) -> None:
        for name in ("O_G", "S_G", "m", "n"):
            if int(getattr(self, name)) < 1:
                raise InvalidInput(f"{name} must be a positive integer")
        if self.n < 2:
            raise InvalidInput(f"the complexity model needs n >= 2, got {self.n}")


@dataclass(frozen = True)
class ComplexityReport:
    """Costs as Ratios to the Full Nonlinear Least Squares Baseline"""

    local_build : float
    seq_join : float
    seq_total : float
    dc_join : float
    dc_total : float
    nonlinear_seq_join : float
    nonlinear_seq_total : float
    nonlinear_dc_join : float
    nonlinear_dc_total : float

    def to_dict(self) -> dict:
        return asdict(self)


def complexity_model(p : ComplexityParams) -> ComplexityReport:
    """
    Cost of Local Map Building and Joining Relative to Full Least Squares

    The baseline is ``m * O_G + m * S_G ** 3`` (``m`` iterations over
    all observations with a dense factorization of the whole state).
    Local maps cost ``m * O_G + m / n ** 2 * S_G ** 3``, a linear join
    of maps holding ``s`` entities costs ``2 s + s ** 3`` (``s`` to
    form and solve, one iteration), a nonlinear join ``m * s + m * s ** 3``.

    .. code-block:: python

        report = complexity_model(ComplexityParams(O_G = 52288, S_G = 7197, m = 10, n = 10))
        round(report.seq_join, 4), round(report.dc_join, 4)
        >>> (0.3024, 0.168)
    """

    O, S, m, n = float(p.O_G), float(p.S_G), float(p.m), int(p.n)
    baseline = m * O + m * S ** 3

    local = (m * O + m / n ** 2 * S ** 3) / baseline

    seq_join = sum(2 * i / n * S + (i / n * S) ** 3 for i in range(2, n + 1)) / baseline
    nl_seq_join = sum(m * i / n * S + m * (i / n * S) ** 3 for i in range(2, n + 1)) / baseline

    levels = math.ceil(math.log2(n))
    dc_join, nl_dc_join = 2 * S + S ** 3, m * S + m * S ** 3
    for k in range(1, levels):
        pairs = n // 2 ** k
        s = 2 ** k / n * S
        dc_join += (2 * s + s ** 3) * pairs
        nl_dc_join += (m * s + m * s ** 3) * pairs
    dc_join /= baseline
    nl_dc_join /= baseline

    return ComplexityReport(
        local_build = local,
        seq_join = seq_join,
        seq_total = local + seq_join,
        dc_join = dc_join,
        dc_total = local + dc_join,
        nonlinear_seq_join = nl_seq_join,
        nonlinear_seq_total = local + nl_seq_join,
        nonlinear_dc_join = nl_dc_join,
        nonlinear_dc_total = local + nl_dc_join
    )

# -*- encoding: utf-8 -*-

"""
Partition of a Pose Graph into Pose Only Local Map Chunks

The poses, in ascending id order, are cut into chunks of ``k`` steps,
so that consecutive chunks share their boundary pose. Every edge is
assigned to exactly one chunk: the chunk holding both endpoints, else
the chunk of the later endpoint, the earlier pose being imported as an
extra (shared) pose of that chunk.
"""

import bisect
import logging

from typing import List

import numpy as np
import scipy.sparse as sps

from scipy.sparse.csgraph import connected_components

from linslam.errors import InvalidInput
from linslam.io.posegraph import PoseGraph
from linslam.localmap import RawLocalData

logger = logging.getLogger(__name__)

def _check_connected(graph : PoseGraph, ids : list) -> None:
    position = {ident : i for i, ident in enumerate(ids)}
    rows = [position[edge.source] for edge in graph.edges]
    cols = [position[edge.target] for edge in graph.edges]
    adjacency = sps.coo_matrix((np.ones(len(rows)), (rows, cols)), shape = (len(ids), len(ids)))

    count, labels = connected_components(adjacency, directed = False)
    if count > 1:
        isolated = [ids[i] for i in np.flatnonzero(labels != labels[0])]
        raise InvalidInput(f"pose graph is disconnected, {count} components (e.g. poses {isolated[:5]})")


def chunk_bounds(count : int, k : int) -> list:
    """
    Index Bounds ``(first, last)`` (Inclusive) of the Chunks

    .. code-block:: python

        chunk_bounds(10, 5)
        >>> [(0, 5), (5, 9)]
    """

    return [(start, min(start + k, count - 1)) for start in range(0, count - 1, k)]


def partition_pose_graph(graph : PoseGraph, k : int) -> List[RawLocalData]:
    """
    Cut a Pose Graph into Pose Only Chunks Sharing Boundary Poses

    .. code-block:: python

        chunks = partition_pose_graph(graph, 5)  # 10 pose chain
        [chunk.poses for chunk in chunks]
        >>> [(0, 1, 2, 3, 4, 5), (5, 6, 7, 8, 9)]

    :type  graph: PoseGraph
    :param graph: A connected pose graph.

    :type  k: int
    :param k: Number of pose steps per chunk, at least 2.

    :raises InvalidInput: ``k < 2``, fewer than two poses or a
        disconnected graph.

    :rtype:  list
    :return: One :class:`RawLocalData` per chunk, its first pose is the
        start of the chunk and imported poses come last.
    """

    if int(k) != k or k < 2:
        raise InvalidInput(f"chunk size must be an integer >= 2, got {k}")

    ids = graph.pose_ids
    if len(ids) < 2:
        raise InvalidInput("a pose graph needs at least two poses to be partitioned")
    _check_connected(graph, ids)

    position = {ident : i for i, ident in enumerate(ids)}
    bounds = chunk_bounds(len(ids), int(k))
    lasts = [last for _, last in bounds]

    poses = [list(ids[first : last + 1]) for first, last in bounds]
    edges = [[] for _ in bounds]
    for edge in graph.edges:
        early, late = sorted((position[edge.source], position[edge.target]))

        # lowest chunk holding the later endpoint
        chunk = bisect.bisect_left(lasts, late)
        if early < bounds[chunk][0] and ids[early] not in poses[chunk]:
            poses[chunk].append(ids[early])
        edges[chunk].append(edge)

    chunks = [
        RawLocalData(poses = tuple(chunk_poses), odometry = tuple(chunk_edges), tag = graph.tag)
        for chunk_poses, chunk_edges in zip(poses, edges)
    ]

    logger.info(
        "partitioned %d poses / %d edges into %d chunks of %d steps",
        len(ids), len(graph.edges), len(chunks), k
    )
    return chunks

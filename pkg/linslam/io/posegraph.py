# -*- encoding: utf-8 -*-

"""
Standard Pose Graph Text Format (g2o Style)

Supported records, one per line:

.. code-block:: text

    VERTEX_SE2 id x y theta
    EDGE_SE2 i j dx dy dtheta I11 I12 I13 I22 I23 I33
    VERTEX_SE3:QUAT id x y z qx qy qz qw
    EDGE_SE3:QUAT i j dx dy dz qx qy qz qw I11 I12 ... I66
    FIX id

The information values are the upper triangle of the block, row by
row. Quaternions (scalar last) are converted to Z-Y-X Euler angles
``(yaw, pitch, roll)`` and the 3D information blocks, given on the
local rotation vector, are converted to the Euler angle parameter by
congruence with the Euler rate matrix. Records close to the gimbal
lock are kept and flagged in :attr:`PoseGraph.warnings`.
"""

import logging

from dataclasses import dataclass, field

import numpy as np

from scipy.spatial.transform import Rotation

from linslam.core.geometry import angles_from_rot, euler_rate_matrix, rot_from_angles, wrap_angle
from linslam.core.state import DimensionTag
from linslam.errors import InvalidInput, ParseError
from linslam.io.mapfile import decode, format_number, parse_index, parse_number
from linslam.localmap import OdometryEdge

logger = logging.getLogger(__name__)

QUATERNION_TOLERANCE = 1e-6

# records with cos(pitch) below this value are flagged
GIMBAL_WARNING = 1e-3

RECORDS = {
    "VERTEX_SE2" : (DimensionTag.D2, 4),
    "EDGE_SE2" : (DimensionTag.D2, 11),
    "VERTEX_SE3:QUAT" : (DimensionTag.D3, 8),
    "EDGE_SE3:QUAT" : (DimensionTag.D3, 30),
}

@dataclass(frozen = True, eq = False)
class PoseGraph:
    """
    Vertices and Relative Pose Edges of a Pose Graph

    :type  vertices: dict
    :param vertices: Initial pose ``(t, angles)`` of each declared
        vertex, by id. Edges may reference vertices that are not
        declared.

    :type  edges: tuple
    :param edges: Relative pose constraints, as
        :class:`linslam.localmap.OdometryEdge`, in file order.

    :type  warnings: tuple
    :param warnings: Human readable notes on near gimbal lock records.
    """

    tag : DimensionTag
    vertices : dict = field(default_factory = dict)
    edges : tuple = ()
    warnings : tuple = ()
    fixed : tuple = ()

    @property
    def pose_ids(self) -> list:
        """Declared and Implied Vertex Identifiers, Ascending"""

        ids = set(self.vertices)
        for edge in self.edges:
            ids.update((edge.source, edge.target))
        return sorted(ids)


def _upper_to_full(values : list, size : int) -> np.ndarray:
    info = np.zeros((size, size))
    rows, cols = np.triu_indices(size)
    info[rows, cols] = values
    info[cols, rows] = values
    return info


def _full_to_upper(info : np.ndarray) -> list:
    rows, cols = np.triu_indices(info.shape[0])
    return info[rows, cols].tolist()


def _check_psd(info : np.ndarray) -> bool:
    eigen = np.linalg.eigvalsh(info)
    return eigen.min() >= -1e-9 * max(1.0, np.abs(eigen).max())


def _quaternion_angles(values : list) -> tuple:
    quaternion = np.asarray(values)
    norm = np.linalg.norm(quaternion)
    if abs(norm - 1.0) > QUATERNION_TOLERANCE:
        raise InvalidInput(f"quaternion norm {norm:.9g} is not unit")

    rotation = Rotation.from_quat(quaternion).as_matrix()
    angles = angles_from_rot(rotation, guard = False)
    return angles, abs(np.cos(angles[1])) < GIMBAL_WARNING


def _euler_information(info : np.ndarray, angles : np.ndarray) -> np.ndarray:
    T = np.eye(6)
    T[3:, 3:] = euler_rate_matrix(angles)
    return T.T @ info @ T


def _tangent_information(info : np.ndarray, angles : np.ndarray) -> np.ndarray:
    T_inv = np.eye(6)
    T_inv[3:, 3:] = np.linalg.inv(euler_rate_matrix(angles))
    return T_inv.T @ info @ T_inv


def parse_pose_graph(text : str) -> PoseGraph:
    """
    Parse the Text Form of a Pose Graph

    :raises ParseError: Malformed or unknown record, or 2D and 3D
        records mixed, positioned at the offending line.
    :raises InvalidInput: Non unit quaternion or information block not
        positive semi-definite, ``.line`` set.
    """

    tag, vertices, edges, warnings, fixed = None, {}, [], [], []
    for number, line in enumerate(text.split("\n"), start = 1):
        tokens = line.split()
        if not tokens or tokens[0].startswith("#"):
            continue

        record = tokens[0]
        if record == "FIX":
            try:
                fixed.extend(parse_index(token) for token in tokens[1:])
            except ValueError as err:
                raise ParseError(str(err), number, line) from err
            continue

        if record not in RECORDS:
            raise ParseError(f"unknown record {record!r}", number, line)

        record_tag, count = RECORDS[record]
        if len(tokens) - 1 != count:
            raise ParseError(f"{record} needs {count} fields, got {len(tokens) - 1}", number, line)
        if tag is not None and record_tag is not tag:
            raise ParseError(f"{record} mixes {record_tag.value} with {tag.value} records", number, line)
        tag = record_tag

        try:
            if record.startswith("VERTEX"):
                ids, values = [parse_index(tokens[1])], [parse_number(t) for t in tokens[2:]]
            else:
                ids, values = [parse_index(t) for t in tokens[1:3]], [parse_number(t) for t in tokens[3:]]
        except ValueError as err:
            raise ParseError(str(err), number, line) from err

        if record.startswith("EDGE") and ids[0] == ids[1]:
            raise ParseError(f"edge {ids[0]}->{ids[1]} is a self loop", number, line)

        try:
            if record == "VERTEX_SE2":
                vertices[ids[0]] = np.array([values[0], values[1], wrap_angle(values[2])])
            elif record == "EDGE_SE2":
                info = _upper_to_full(values[3:], 3)
                if not _check_psd(info):
                    raise InvalidInput("information block is not positive semi-definite")
                measurement = np.array([values[0], values[1], wrap_angle(values[2])])
                edges.append(OdometryEdge(ids[0], ids[1], measurement, info))
            elif record == "VERTEX_SE3:QUAT":
                angles, near_gimbal = _quaternion_angles(values[3:7])
                vertices[ids[0]] = np.concatenate([values[:3], angles])
                if near_gimbal:
                    warnings.append(f"line {number}: vertex {ids[0]} close to gimbal lock")
            else:
                angles, near_gimbal = _quaternion_angles(values[3:7])
                info = _upper_to_full(values[7:], 6)
                if not _check_psd(info):
                    raise InvalidInput("information block is not positive semi-definite")
                if near_gimbal:
                    warnings.append(f"line {number}: edge {ids[0]}->{ids[1]} close to gimbal lock")

                info = _euler_information(info, angles)
                edges.append(OdometryEdge(ids[0], ids[1], np.concatenate([values[:3], angles]), 0.5 * (info + info.T)))
        except InvalidInput as err:
            raise InvalidInput(str(err), line = number) from err

    if tag is None:
        raise ParseError("no vertex or edge record", 1)

    for warning in warnings:
        logger.warning(warning)

    return PoseGraph(tag = tag, vertices = vertices, edges = tuple(edges), warnings = tuple(warnings), fixed = tuple(fixed))


def read_pose_graph(path : str) -> PoseGraph:
    """
    Read a Pose Graph File

    .. code-block:: python

        graph = read_pose_graph("manhattan.g2o")
        graph.tag, len(graph.pose_ids), len(graph.edges)
        >>> (<DimensionTag.D2: '2D'>, 3500, 5453)

    :raises ParseError: Malformed file, positioned at the offending
        line.
    :raises InvalidInput: Non unit quaternion or not positive
        semi-definite information, ``.line`` set.
    """

    with open(path, "rb") as handle:
        graph = parse_pose_graph(decode(handle.read()))

    logger.info("read %s: %d vertices, %d edges (%s)", path, len(graph.vertices), len(graph.edges), graph.tag.value)
    return graph


def _quaternion(angles : np.ndarray) -> list:
    return Rotation.from_matrix(rot_from_angles(angles)).as_quat().tolist()


def format_pose_graph(graph : PoseGraph) -> str:
    lines = []
    for ident in sorted(graph.vertices):
        pose = graph.vertices[ident]
        if graph.tag is DimensionTag.D2:
            values = pose.tolist()
            record = "VERTEX_SE2"
        else:
            values = pose[:3].tolist() + _quaternion(pose[3:])
            record = "VERTEX_SE3:QUAT"
        lines.append(" ".join([record, str(ident)] + [format_number(v) for v in values]))

    for edge in graph.edges:
        if graph.tag is DimensionTag.D2:
            values = edge.measurement.tolist() + _full_to_upper(edge.info)
            record = "EDGE_SE2"
        else:
            angles = edge.measurement[3:]
            values = edge.measurement[:3].tolist() + _quaternion(angles)
            values += _full_to_upper(_tangent_information(edge.info, angles))
            record = "EDGE_SE3:QUAT"
        lines.append(" ".join([record, str(edge.source), str(edge.target)] + [format_number(v) for v in values]))

    lines.extend(f"FIX {ident}" for ident in graph.fixed)
    return "\n".join(lines) + "\n"


def write_pose_graph(graph : PoseGraph, path : str) -> None:
    """
    Write a Pose Graph File

    Vertices are written in ascending id order, then the edges in
    their stored order. 2D graphs read back identically, 3D graphs up
    to the rounding of the quaternion and information conversions.
    """

    with open(path, "w", encoding = "utf-8", newline = "\n") as handle:
        handle.write(format_pose_graph(graph))

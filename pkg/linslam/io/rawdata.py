# -*- encoding: utf-8 -*-

"""
JSON Carrier of Raw Local Data Chunks

Written by the ``simulate`` command and read by ``build-maps``:

.. code-block:: json

    {
        "format" : "linslam-raw",
        "version" : 1,
        "dim" : "2D",
        "chunks" : [
            {
                "poses" : [0, 1],
                "odometry" : [{"source" : 0, "target" : 1, "measurement" : [1, 0, 0], "info" : [[...]]}],
                "observations" : [{"pose" : 0, "feature" : 3, "measurement" : [2, 1], "info" : [[...]]}]
            }
        ]
    }
"""

import json
import logging

from typing import List, Sequence

from linslam.core.state import DimensionTag
from linslam.errors import InvalidInput, ParseError
from linslam.io.mapfile import decode
from linslam.localmap import Observation, OdometryEdge, RawLocalData

logger = logging.getLogger(__name__)

FORMAT = "linslam-raw"
VERSION = 1

def _chunk_to_dict(chunk : RawLocalData) -> dict:
    return {
        "poses" : list(chunk.poses),
        "odometry" : [
            {
                "source" : edge.source,
                "target" : edge.target,
                "measurement" : edge.measurement.tolist(),
                "info" : edge.info.tolist()
            }
            for edge in chunk.odometry
        ],
        "observations" : [
            {
                "pose" : obs.pose_id,
                "feature" : obs.feature_id,
                "measurement" : obs.measurement.tolist(),
                "info" : obs.info.tolist()
            }
            for obs in chunk.observations
        ]
    }


def _records(record : dict, name : str, index : int) -> list:
    values = record.get(name, [])
    if not isinstance(values, list) or not all(isinstance(value, dict) for value in values):
        raise InvalidInput(f"chunk {index}: '{name}' must be a list of objects")
    return values


def _chunk_from_dict(record : dict, tag : DimensionTag, index : int) -> RawLocalData:
    if not isinstance(record, dict):
        raise InvalidInput(f"chunk {index} is not an object, got {type(record).__name__}")
    if not isinstance(record.get("poses"), list):
        raise InvalidInput(f"chunk {index}: 'poses' must be a list of pose ids")

    odometry = tuple(
        OdometryEdge(int(edge["source"]), int(edge["target"]), edge["measurement"], edge["info"])
        for edge in _records(record, "odometry", index)
    )
    observations = tuple(
        Observation(int(obs["pose"]), int(obs["feature"]), obs["measurement"], obs["info"])
        for obs in _records(record, "observations", index)
    )
    return RawLocalData(poses = tuple(record["poses"]), odometry = odometry, observations = observations, tag = tag)


def write_raw_data(chunks : Sequence[RawLocalData], path : str) -> None:
    """Write Raw Chunks (all of the same Dimension) to a JSON File"""

    chunks = list(chunks)
    tags = {chunk.tag for chunk in chunks}
    if len(tags) > 1:
        raise InvalidInput("chunks of a dataset must share the dimension tag")

    document = {
        "format" : FORMAT,
        "version" : VERSION,
        "dim" : (tags.pop() if tags else DimensionTag.D2).value,
        "chunks" : [_chunk_to_dict(chunk) for chunk in chunks]
    }

    with open(path, "w", encoding = "utf-8") as handle:
        json.dump(document, handle, indent = 1)

    logger.debug("written %d raw chunk(s) to %s", len(chunks), path)


def read_raw_data(path : str) -> List[RawLocalData]:
    """
    Read Raw Chunks from a JSON File

    :raises ParseError: Not a JSON document, positioned at the
        offending line.
    :raises InvalidInput: The document does not describe raw chunks.
    """

    with open(path, "rb") as handle:
        text = decode(handle.read())

    try:
        document = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(err.msg, err.lineno) from err

    if not isinstance(document, dict) or document.get("format") != FORMAT:
        raise InvalidInput(f"{path} is not a {FORMAT} document")
    if document.get("version") != VERSION:
        raise InvalidInput(f"unsupported {FORMAT} version {document.get('version')!r}")

    tag = DimensionTag.parse(document.get("dim", ""))
    chunks = document.get("chunks")
    if not isinstance(chunks, list):
        raise InvalidInput(f"{path}: 'chunks' must be a list")

    try:
        return [_chunk_from_dict(record, tag, index) for index, record in enumerate(chunks)]
    except (AttributeError, IndexError, KeyError, TypeError, ValueError) as err:
        if isinstance(err, InvalidInput):
            raise
        raise InvalidInput(f"malformed chunk record in {path}: {err!r}") from err

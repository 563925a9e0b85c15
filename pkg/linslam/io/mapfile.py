# -*- encoding: utf-8 -*-

"""
Local Map Exchange Format (``.lmap``)

A line oriented, locale independent text carrier for a
:class:`linslam.core.state.LocalMap`:

.. code-block:: text

    LMAP 1
    dim 2D
    frame pose 5
    entries 2
    pose 6 1.0 0.5 0.25
    feature 3 2.0 -1.0
    info 7
    0 0 1
    ...
    end

Entries keep the order of the estimate, the information matrix is
written as its lower triangle triplets ``row col value`` (``row >= col``,
ascending). Values are written with 17 significant digits, so that a
written map reads back bit for bit. Blank lines and lines starting
with ``#`` are ignored by the reader.

The full grammar is documented in ``docs/formats.md``.
"""

import re
import logging

from typing import Iterator

import numpy as np

from linslam.core.sparse import SparseSymMatrix, is_psd
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
from linslam.errors import InvalidInput, LinSLAMError, ParseError

logger = logging.getLogger(__name__)

MAGIC = "LMAP"
VERSION = 1

NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
INTEGER = re.compile(r"^\d+$")

def format_number(value : float) -> str:
    """Shortest Round Trip Safe Decimal Form (17 Significant Digits)"""

    return f"{float(value):.17g}"


def parse_number(token : str) -> float:
    """
    Strict Decimal Number, no ``nan``, ``inf`` or Digit Separators

    :raises ValueError: The token is not a plain decimal number.
    """

    if not NUMBER.match(token):
        raise ValueError(f"not a decimal number: {token!r}")
    value = float(token)
    if not np.isfinite(value):
        raise ValueError(f"number out of range: {token!r}")
    return value


def parse_index(token : str) -> int:
    if not INTEGER.match(token):
        raise ValueError(f"not a non negative integer: {token!r}")
    return int(token)


def parse_frame(tokens : list) -> FrameDescriptor:
    """
    Frame Descriptor from its Text Form

    .. code-block:: python

        parse_frame("feature2d 1 2".split())
        >>> FeatureFrame2D(origin_id=1, x_axis_id=2)

    :raises ValueError: Unknown frame kind or wrong number of ids.
    """

    if not tokens:
        raise ValueError("missing frame kind")

    kind, ids = tokens[0], [parse_index(token) for token in tokens[1:]]
    expected = {"pose" : (1, PoseFrame), "feature2d" : (2, FeatureFrame2D), "feature3d" : (3, FeatureFrame3D)}
    if kind not in expected:
        raise ValueError(f"unknown frame kind {kind!r}")

    count, factory = expected[kind]
    if len(ids) != count:
        raise ValueError(f"frame {kind} needs {count} id(s), got {len(ids)}")
    return factory(*ids)


def format_map(local : LocalMap) -> str:
    """Canonical Text Form of a Map"""

    tag = local.tag
    lines = [f"{MAGIC} {VERSION}", f"dim {tag.value}", f"frame {local.frame}", f"entries {len(local.estimate)}"]
    for key, value in local.estimate.items():
        kind = "pose" if key.is_pose else "feature"
        lines.append(" ".join([kind, str(key.id)] + [format_number(v) for v in value]))

    triplets = local.info.triplets
    lines.append(f"info {len(triplets)}")
    lines.extend(f"{row} {col} {format_number(value)}" for row, col, value in triplets)
    lines.append("end")

    return "\n".join(lines) + "\n"


class _Lines:
    """Iterator over Meaningful Lines, Keeping Track of Line Numbers"""

    def __init__(self, text : str) -> None:
        self._lines = text.split("\n")
        self._iter = self._records()
        self.number, self.text = 0, ""

    def _records(self) -> Iterator[tuple]:
        for number, line in enumerate(self._lines, start = 1):
            stripped = line.strip()
            if stripped and not stripped.startswith("#"):
                yield number, stripped

    def next(self, expecting : str) -> list:
        try:
            self.number, self.text = next(self._iter)
        except StopIteration:
            raise ParseError(f"unexpected end of input, expecting {expecting}", len(self._lines)) from None
        return self.text.split()

    def error(self, message : str) -> ParseError:
        return ParseError(message, self.number, self.text)

    def rest(self) -> list:
        return list(self._iter)


def _keyword(lines : _Lines, keyword : str, count : int) -> list:
    tokens = lines.next(keyword)
    if tokens[0] != keyword or len(tokens) != count + 1:
        raise lines.error(f"expected '{keyword}' followed by {count} field(s)")
    return tokens[1:]


def parse_map(text : str) -> LocalMap:
    """
    Parse the Text Form of a Map

    :raises ParseError: Malformed text, positioned at the offending
        line.
    :raises InvalidInput: The information matrix is not positive
        semi-definite, ``.line`` is the line of the ``info`` header.
    """

    lines = _Lines(text)

    try:
        header = _keyword(lines, MAGIC, 1)
        if parse_index(header[0]) != VERSION:
            raise lines.error(f"unsupported {MAGIC} version {header[0]}")

        tag = DimensionTag.parse(_keyword(lines, "dim", 1)[0])

        tokens = lines.next("frame")
        if tokens[0] != "frame":
            raise lines.error("expected 'frame'")
        frame = parse_frame(tokens[1:])
        partial = frame.partial_dims(tag)

        count = parse_index(_keyword(lines, "entries", 1)[0])
        entries = []
        for _ in range(count):
            tokens = lines.next("an entry")
            if tokens[0] not in ("pose", "feature") or len(tokens) < 2:
                raise lines.error("expected 'pose <id> ...' or 'feature <id> ...'")

            ident = parse_index(tokens[1])
            key = PoseKey(ident) if tokens[0] == "pose" else FeatureKey(ident)
            expected = partial.get(key, tag.pose_dim if key.is_pose else tag.feature_dim)
            if len(tokens) - 2 != expected:
                raise lines.error(f"entry {key} needs {expected} value(s), got {len(tokens) - 2}")
            entries.append((key, [parse_number(token) for token in tokens[2:]]))

        estimate = StateVector(entries, tag, partial = partial)

        count = parse_index(_keyword(lines, "info", 1)[0])
        info_line = lines.number

        rows, cols, vals, seen = [], [], [], set()
        for _ in range(count):
            tokens = lines.next("an information triplet")
            if len(tokens) != 3:
                raise lines.error("expected 'row col value'")

            row, col, value = parse_index(tokens[0]), parse_index(tokens[1]), parse_number(tokens[2])
            if row >= estimate.dim or col > row:
                raise lines.error(f"triplet ({row}, {col}) outside the lower triangle of dimension {estimate.dim}")
            if (row, col) in seen:
                raise lines.error(f"duplicate triplet ({row}, {col})")

            seen.add((row, col))
            rows.append(row)
            cols.append(col)
            vals.append(value)

        _keyword(lines, "end", 0)
        trailing = lines.rest()
        if trailing:
            number, line = trailing[0]
            raise ParseError("content after 'end'", number, line)

        info = SparseSymMatrix(estimate.dim, rows, cols, vals)
        local = LocalMap(frame = frame, estimate = estimate, info = info)
    except ParseError:
        raise
    except (ValueError, LinSLAMError) as err:
        raise lines.error(str(err)) from err

    if not is_psd(info):
        raise InvalidInput("information matrix is not positive semi-definite", line = info_line)

    return local


def write_map_file(local : LocalMap, path : str) -> None:
    """
    Write a Map to a ``.lmap`` File

    .. code-block:: python

        write_map_file(local, "submap_003.lmap")
        read_map_file("submap_003.lmap") == local
        >>> True
    """

    with open(path, "w", encoding = "utf-8", newline = "\n") as handle:
        handle.write(format_map(local))

    logger.debug("written %s (%d entries)", path, len(local.estimate))


def decode(raw : bytes) -> str:
    """
    Decode File Content as UTF-8, Positioning Invalid Bytes

    :raises ParseError: Invalid UTF-8, at the line holding the
        offending byte.
    """

    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as err:
        raise ParseError(f"invalid UTF-8 byte at offset {err.start}", raw.count(b"\n", 0, err.start) + 1) from err


def read_map_file(path : str) -> LocalMap:
    """
    Read a Map from a ``.lmap`` File

    :raises ParseError: Malformed file, positioned at the offending
        line.
    :raises InvalidInput: The information matrix is not positive
        semi-definite.
    :raises OSError: The file cannot be read.
    """

    with open(path, "rb") as handle:
        return parse_map(decode(handle.read()))

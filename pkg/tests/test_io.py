# -*- encoding: utf-8 -*-

import csv
import json

import numpy as np
import pytest

from linslam.core.sparse import SparseSymMatrix
from linslam.core.state import DimensionTag, FeatureFrame2D, FeatureKey, LocalMap, PoseFrame, PoseKey, StateVector
from linslam.errors import InvalidInput, ParseError
from linslam.evaluation import MetricReport
from linslam.io import (
    chunk_bounds,
    format_map,
    format_pose_graph,
    parse_frame,
    parse_map,
    parse_pose_graph,
    partition_pose_graph,
    read_map_file,
    read_pose_graph,
    read_raw_data,
    write_map_file,
    write_plot_data,
    write_pose_graph,
    write_raw_data
)
from linslam.sim import ScenarioConfig, generate

D2 = DimensionTag.D2

CHAIN = "\n".join(
    ["VERTEX_SE2 0 0 0 0"]
    + [f"EDGE_SE2 {i} {i + 1} 1 0 0.1 10 0 0 10 0 100" for i in range(9)]
) + "\n"

@pytest.fixture
def local_map(rng) -> LocalMap:
    estimate = StateVector([
        (PoseKey(6), [1.0, 0.5, 0.25]),
        (FeatureKey(3), [2.0, -1.0]),
        (FeatureKey(4), [1.0 / 3.0, 1e-20])
    ], D2)
    factor = rng.normal(size = (7, 7))
    return LocalMap(PoseFrame(5), estimate, SparseSymMatrix.from_dense(factor @ factor.T))


def test_map_round_trip(tmp_path, local_map):
    path = tmp_path / "submap.lmap"
    write_map_file(local_map, str(path))
    assert read_map_file(str(path)) == local_map

    text = format_map(local_map)
    assert text.startswith("LMAP 1\ndim 2D\nframe pose 5\nentries 3\npose 6 1 0.5 0.25\n")
    assert text.endswith("end\n")


def test_feature_frame_map_round_trip():
    estimate = StateVector([(FeatureKey(2), [3.0]), (FeatureKey(5), [1.0, 2.0])], D2, partial = {FeatureKey(2) : 1})
    local = LocalMap(FeatureFrame2D(1, 2), estimate, SparseSymMatrix.identity(3))

    text = format_map(local)
    assert "frame feature2d 1 2\n" in text and "feature 2 3\n" in text
    assert parse_map(text) == local


def test_comments_and_blank_lines_are_ignored(local_map):
    lines = format_map(local_map).split("\n")
    commented = "\n".join(["# exported submap", ""] + lines[:4] + ["", "   # entries follow"] + lines[4:])
    assert parse_map(commented) == local_map


def test_truncated_map_is_rejected(local_map):
    lines = format_map(local_map).rstrip("\n").split("\n")
    for cut in range(len(lines)):
        with pytest.raises(ParseError):
            parse_map("\n".join(lines[:cut]))

    with pytest.raises(ParseError) as err:
        parse_map("\n".join(lines[:-1]) + "\n")
    assert "unexpected end of input" in str(err.value)


@pytest.mark.parametrize("old, new", [
    ("LMAP 1", "LMAP 2"),
    ("dim 2D", "dim 4D"),
    ("frame pose 5", "frame pose"),
    ("pose 6 1 0.5 0.25", "pose 6 1 nan 0.25"),
    ("pose 6 1 0.5 0.25", "pose 6 1 0.5"),
    ("feature 3 2 -1", "feature 3 2 1,5"),
    ("end", "end\npose 1 0 0 0"),
])
def test_malformed_map_lines(local_map, old, new):
    text = format_map(local_map).replace(old, new, 1)
    with pytest.raises(ParseError) as err:
        parse_map(text)
    assert err.value.line >= 1


def test_non_psd_information_is_invalid_input():
    text = "LMAP 1\ndim 2D\nframe pose 0\nentries 1\nfeature 1 0 0\ninfo 2\n0 0 -1\n1 1 1\nend\n"
    with pytest.raises(InvalidInput) as err:
        parse_map(text)
    assert err.value.line == 6


def test_invalid_utf8(tmp_path, local_map):
    path = tmp_path / "broken.lmap"
    path.write_bytes(format_map(local_map).encode("utf-8").replace(b"dim 2D", b"dim \xff2D"))

    with pytest.raises(ParseError) as err:
        read_map_file(str(path))
    assert err.value.line == 2


def test_parse_frame():
    assert parse_frame(["feature2d", "1", "2"]) == FeatureFrame2D(1, 2)
    with pytest.raises(ValueError):
        parse_frame(["feature3d", "1", "2"])
    with pytest.raises(ValueError):
        parse_frame(["camera", "1"])


def test_pose_graph_round_trip():
    graph = parse_pose_graph(CHAIN + "FIX 0\n")

    assert graph.tag is D2 and graph.pose_ids == list(range(10))
    assert graph.fixed == (0, )
    np.testing.assert_allclose(graph.edges[0].info, np.diag([10.0, 10.0, 100.0]))

    again = parse_pose_graph(format_pose_graph(graph))
    assert again.pose_ids == graph.pose_ids and again.fixed == graph.fixed
    for ours, theirs in zip(again.edges, graph.edges):
        assert (ours.source, ours.target) == (theirs.source, theirs.target)
        np.testing.assert_array_equal(ours.measurement, theirs.measurement)
        np.testing.assert_array_equal(ours.info, theirs.info)


def test_pose_graph_file(tmp_path):
    path = tmp_path / "chain.g2o"
    path.write_text(CHAIN)

    graph = read_pose_graph(str(path))
    assert len(graph.edges) == 9 and not graph.warnings

    copy = tmp_path / "copy.g2o"
    write_pose_graph(graph, str(copy))
    assert read_pose_graph(str(copy)).pose_ids == graph.pose_ids


def test_identity_quaternion_gives_zero_angles():
    graph = parse_pose_graph("VERTEX_SE3:QUAT 0 1 2 3 0 0 0 1\n")
    assert graph.tag is DimensionTag.D3
    np.testing.assert_allclose(graph.vertices[0], [1.0, 2.0, 3.0, 0.0, 0.0, 0.0], atol = 1e-12)


@pytest.mark.parametrize("text, line", [
    ("VERTEX_XYZ 0 1 2\n", 1),
    ("VERTEX_SE2 0 0 0\n", 1),
    ("VERTEX_SE2 0 0 0 0\nVERTEX_SE3:QUAT 1 0 0 0 0 0 0 1\n", 2),
    ("VERTEX_SE2 0 0 0 0\nEDGE_SE2 1 1 1 0 0 1 0 0 1 0 1\n", 2),
    ("# nothing here\n", 1),
])
def test_pose_graph_parse_errors(text, line):
    with pytest.raises(ParseError) as err:
        parse_pose_graph(text)
    assert err.value.line == line


def test_pose_graph_invalid_values():
    with pytest.raises(InvalidInput) as err:
        parse_pose_graph("VERTEX_SE3:QUAT 1 0 0 0 0 0 0 2\n")
    assert err.value.line == 1

    with pytest.raises(InvalidInput) as err:
        parse_pose_graph("VERTEX_SE2 0 0 0 0\nEDGE_SE2 0 1 1 0 0 -1 0 0 1 0 1\n")
    assert err.value.line == 2


def test_chunk_bounds():
    assert chunk_bounds(10, 5) == [(0, 5), (5, 9)]
    assert chunk_bounds(11, 5) == [(0, 5), (5, 10)]
    assert chunk_bounds(12, 5) == [(0, 5), (5, 10), (10, 11)]


def test_partition_chain_and_loop_closure():
    chunks = partition_pose_graph(parse_pose_graph(CHAIN), 5)
    assert [chunk.poses for chunk in chunks] == [(0, 1, 2, 3, 4, 5), (5, 6, 7, 8, 9)]
    assert [len(chunk.odometry) for chunk in chunks] == [5, 4]
    assert all(not chunk.observations for chunk in chunks)

    loop = CHAIN + "EDGE_SE2 1 9 -8 0 0 1 0 0 1 0 1\n"
    chunks = partition_pose_graph(parse_pose_graph(loop), 5)
    assert chunks[1].poses == (5, 6, 7, 8, 9, 1)
    assert len(chunks[1].odometry) == 5


def test_partition_errors():
    graph = parse_pose_graph(CHAIN)
    with pytest.raises(InvalidInput):
        partition_pose_graph(graph, 1)

    with pytest.raises(InvalidInput):
        partition_pose_graph(parse_pose_graph("VERTEX_SE2 0 0 0 0\n"), 5)

    disconnected = parse_pose_graph(CHAIN + "EDGE_SE2 20 21 1 0 0 1 0 0 1 0 1\n")
    with pytest.raises(InvalidInput):
        partition_pose_graph(disconnected, 5)


def test_raw_data_round_trip(tmp_path):
    _, chunks = generate(ScenarioConfig(poses = 11, chunk_size = 5, seed = 2))
    path = tmp_path / "raw.json"
    write_raw_data(chunks, str(path))

    again = read_raw_data(str(path))
    assert len(again) == len(chunks)
    for ours, theirs in zip(again, chunks):
        assert ours.poses == theirs.poses and ours.tag is theirs.tag
        assert len(ours.observations) == len(theirs.observations)
        for a, b in zip(ours.odometry, theirs.odometry):
            np.testing.assert_array_equal(a.measurement, b.measurement)
            np.testing.assert_array_equal(a.info, b.info)


def test_raw_data_errors(tmp_path):
    path = tmp_path / "raw.json"

    path.write_text('{"format": "linslam-raw",\n "version": 1,\n "chunks": [}')
    with pytest.raises(ParseError) as err:
        read_raw_data(str(path))
    assert err.value.line == 3

    path.write_text('{"format": "other", "version": 1}')
    with pytest.raises(InvalidInput):
        read_raw_data(str(path))

    path.write_text('{"format": "linslam-raw", "version": 7, "dim": "2D", "chunks": []}')
    with pytest.raises(InvalidInput):
        read_raw_data(str(path))

    path.write_text('{"format": "linslam-raw", "version": 1, "dim": "2D", "chunks": [{"odometry": []}]}')
    with pytest.raises(InvalidInput):
        read_raw_data(str(path))


def _csv_rows(path) -> list:
    with open(path, newline = "", encoding = "utf-8") as handle:
        return list(csv.reader(handle))


def test_plot_data_of_a_map(tmp_path):
    path = tmp_path / "map.csv"
    single = LocalMap(PoseFrame(0), StateVector([(FeatureKey(7), [1.0, 0.0])], D2), SparseSymMatrix.identity(2))
    write_plot_data(single, str(path))

    assert _csv_rows(path) == [
        ["kind", "id", "x", "y", "sigma_x", "sigma_y"],
        ["feature", "7", "1.0", "0.0", "1.0", "1.0"]
    ]

    empty = LocalMap(PoseFrame(0), StateVector([], D2), SparseSymMatrix.zeros(0))
    write_plot_data(empty, str(path))
    assert _csv_rows(path) == [["kind", "id", "x", "y", "sigma_x", "sigma_y"]]


def test_plot_data_of_a_report(tmp_path):
    path = tmp_path / "metrics.csv"
    write_plot_data(MetricReport(chi2 = 2.5, dims = 4), str(path))
    assert _csv_rows(path) == [["metric", "value"], ["chi2", "2.5"], ["dims", "4"]]


JUNK = [None, True, -3, 2.5, "x", [], [1, 2], [[1, 2], [3]], {}, {"poses" : 1}]

def _mutated(node, rng):
    """Replace one randomly chosen node of a JSON document by junk"""

    if isinstance(node, dict) and node and rng.random() < 0.85:
        key = sorted(node)[int(rng.integers(len(node)))]
        return {**node, key : _mutated(node[key], rng)}
    if isinstance(node, list) and node and rng.random() < 0.85:
        index = int(rng.integers(len(node)))
        return node[:index] + [_mutated(node[index], rng)] + node[index + 1:]
    return JUNK[int(rng.integers(len(JUNK)))]


def test_raw_data_rejects_non_object_chunks(tmp_path):
    path = tmp_path / "raw.json"
    path.write_text('{"format": "linslam-raw", "version": 1, "dim": "2D", "chunks": [1]}')
    with pytest.raises(InvalidInput) as err:
        read_raw_data(str(path))
    assert "chunk 0" in str(err.value)

    path.write_text('{"format": "linslam-raw", "version": 1, "dim": "2D", "chunks": {"poses": [0]}}')
    with pytest.raises(InvalidInput):
        read_raw_data(str(path))


def test_raw_data_fuzz(tmp_path):
    _, chunks = generate(ScenarioConfig(poses = 11, chunk_size = 5, seed = 2))
    path = tmp_path / "raw.json"
    write_raw_data(chunks, str(path))
    document = json.loads(path.read_text())

    rng = np.random.default_rng(41)
    for _ in range(300):
        path.write_text(json.dumps(_mutated(document, rng)))
        try:
            parsed = read_raw_data(str(path))
        except (InvalidInput, ParseError):
            continue
        assert all(chunk.poses for chunk in parsed)


ALPHABET = list("0123456789 .-+eE#\nabcdefinoprstuxyzDEFGQSTUVX_:")

def _scrambled(text : str, rng) -> str:
    """One to three random character substitutions, deletions or insertions"""

    chars = list(text)
    for _ in range(int(rng.integers(1, 4))):
        at = int(rng.integers(len(chars)))
        action = rng.integers(3)
        if action == 0:
            chars[at] = ALPHABET[int(rng.integers(len(ALPHABET)))]
        elif action == 1:
            del chars[at]
        else:
            chars.insert(at, ALPHABET[int(rng.integers(len(ALPHABET)))])
    return "".join(chars)


def test_map_text_fuzz(local_map):
    text = format_map(local_map)

    rng = np.random.default_rng(43)
    for _ in range(500):
        try:
            parsed = parse_map(_scrambled(text, rng))
        except (InvalidInput, ParseError):
            continue
        assert parsed.info.dim == parsed.estimate.dim


def test_pose_graph_text_fuzz():
    rng = np.random.default_rng(47)
    for _ in range(500):
        try:
            graph = parse_pose_graph(_scrambled(CHAIN, rng))
        except (InvalidInput, ParseError):
            continue
        assert all(edge.source != edge.target for edge in graph.edges)

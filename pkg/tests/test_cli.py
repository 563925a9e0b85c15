# -*- encoding: utf-8 -*-

import json

import pytest

from linslam import __version__
from linslam.cli import main
from linslam.core.sparse import SparseSymMatrix
from linslam.core.state import DimensionTag, FeatureKey, LocalMap, PoseFrame, StateVector
from linslam.io import read_map_file, write_map_file

COMPLEXITY = ["complexity", "--og", "52288", "--sg", "7197", "--m", "10", "--n", "10"]

def test_complexity_output(capsys):
    assert main(COMPLEXITY) == 0

    out = capsys.readouterr().out
    assert out.startswith("n=10 local_build=0.0100 seq_join=0.3024 ")
    assert "dc_join=0.1680" in out


def test_json_output(capsys):
    assert main(["--json"] + COMPLEXITY[:-1] + ["10", "100"]) == 0

    document = json.loads(capsys.readouterr().out)
    assert round(document["100"]["seq_join"], 4) == 2.5502
    assert round(document["100"]["dc_join"], 4) == 0.1393


def test_version_and_usage(capsys):
    assert main(["--version"]) == 0
    assert __version__ in capsys.readouterr().out

    assert main([]) == 2
    assert main(["join"]) == 2
    assert main(["complexity", "--og", "ten", "--sg", "1", "--n", "2"]) == 2


def test_error_exit_codes(tmp_path):
    assert main(["join", str(tmp_path / "missing.lmap")]) == 1

    broken = tmp_path / "broken.lmap"
    broken.write_text("LMAP 1\ndim 2D\n")
    assert main(["join", str(broken)]) == 3

    assert main(["complexity", "--og", "10", "--sg", "10", "--n", "1"]) == 3

    raw = tmp_path / "raw.json"
    raw.write_text('{"format": "linslam-raw", "version": 1, "dim": "2D", "chunks": [1]}')
    assert main(["build-maps", str(raw), "--out-dir", str(tmp_path / "maps")]) == 3


def test_join_reports_phase_times(tmp_path, capsys):
    raw = tmp_path / "raw.json"
    assert main(["simulate", "--poses", "11", "--chunk-size", "5", "--seed", "2", "-o", str(raw)]) == 0
    capsys.readouterr()

    assert main(["--json", "join", "--raw", str(raw), "--strategy", "dc"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["maps"] == 2
    assert {"local_map_time", "join_time", "total_time"} <= set(report)
    assert report["total_time"] >= report["local_map_time"] + report["join_time"]

    assert main(["join", "a.lmap", "--raw", str(raw)]) == 2


def test_not_joinable_maps(tmp_path):
    tag = DimensionTag.D2
    first = LocalMap(PoseFrame(0), StateVector([(FeatureKey(1), [1.0, 0.0])], tag), SparseSymMatrix.identity(2))
    second = LocalMap(PoseFrame(5), StateVector([(FeatureKey(2), [0.0, 1.0])], tag), SparseSymMatrix.identity(2))

    paths = [str(tmp_path / "a.lmap"), str(tmp_path / "b.lmap")]
    write_map_file(first, paths[0])
    write_map_file(second, paths[1])
    assert main(["join"] + paths) == 5


def test_config_file(tmp_path, capsys):
    config = tmp_path / "linslam.yaml"
    config.write_text("m: 10\n")
    assert main(["--config", str(config)] + COMPLEXITY[:5] + ["--n", "10"]) == 0
    assert "seq_join=0.3024" in capsys.readouterr().out

    config.write_text("colour: blue\n")
    assert main(["--config", str(config)] + COMPLEXITY) == 3


@pytest.mark.slow
def test_end_to_end(tmp_path, capsys):
    raw, truth, maps = tmp_path / "raw.json", tmp_path / "truth.lmap", tmp_path / "maps"
    assert main([
        "simulate", "--poses", "21", "--chunk-size", "5", "--seed", "3",
        "--feature-density", "0.15", "-o", str(raw), "--truth", str(truth)
    ]) == 0
    assert main(["build-maps", str(raw), "--out-dir", str(maps)]) == 0

    submaps = sorted(str(path) for path in maps.glob("*.lmap"))
    assert len(submaps) == 4

    results = {}
    for strategy in ("seq", "dc"):
        output = tmp_path / f"{strategy}.lmap"
        assert main(["join"] + submaps + ["--strategy", strategy, "-o", str(output)]) == 0
        results[strategy] = read_map_file(str(output))
    assert results["seq"].frame == results["dc"].frame == PoseFrame(20)

    capsys.readouterr()
    assert main(["--json", "eval", str(tmp_path / "seq.lmap"), "--maps"] + submaps + ["--reference", str(truth), "--truth", str(truth)]) == 0
    metrics = json.loads(capsys.readouterr().out)
    assert {"chi2", "rmse_abs_pose", "nees", "nees_bound_95"} <= set(metrics)
    assert metrics["rmse_abs_pose"] < 0.5

    oracle = tmp_path / "oracle.lmap"
    assert main(["oracle"] + submaps + ["-o", str(oracle)]) == 0
    assert read_map_file(str(oracle)).frame == PoseFrame(20)

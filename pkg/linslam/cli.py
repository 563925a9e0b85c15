# -*- encoding: utf-8 -*-

"""
Command Line Surface of the Package

.. code-block:: shell

    linslam simulate --poses 50 --chunk-size 5 --seed 7 -o raw.json --truth truth.lmap
    linslam build-maps raw.json --out-dir maps/
    linslam join maps/*.lmap --strategy dc -o global.lmap
    linslam eval global.lmap --maps maps/*.lmap --truth truth.lmap
    linslam complexity --og 52288 --sg 7197 --m 10 --n 5 10 20

Results are printed as ``key=value`` lines (``--json`` for a JSON
document) on the standard output, diagnostics go to the standard
error. Exit codes: 0 success, 1 operating system error, 2 usage, 3
malformed or invalid input, 4 numerical failure, 5 maps that cannot be
joined.
"""

import os
import sys
import json
import time
import logging
import argparse

from typing import List, Sequence

from linslam import __version__
from linslam.config import configure_logging, load_config, resolve_level
from linslam.core.optimize import GaussNewtonConfig
from linslam.core.state import PoseFrame
from linslam.errors import (
    FrameMismatch,
    InvalidInput,
    LinSLAMError,
    MissingEntity,
    NotJoinable,
    ParseError
)
from linslam.evaluation import chi2, evaluate
from linslam.join import join_two_maps
from linslam.io import (
    partition_pose_graph,
    read_map_file,
    read_pose_graph,
    read_raw_data,
    write_map_file,
    write_plot_data,
    write_raw_data
)
from linslam.localmap import build_local_map
from linslam.oracle import full_nonlinear_ls, nonlinear_join
from linslam.sim import ScenarioConfig, generate, truth_map
from linslam.strategy import (
    ComplexityParams,
    complexity_model,
    join_divide_conquer,
    join_sequential,
    prepare_pair
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_OS, EXIT_USAGE, EXIT_INPUT, EXIT_NUMERIC, EXIT_NOT_JOINABLE = 0, 1, 2, 3, 4, 5

def exit_code(err : Exception) -> int:
    """Exit Code of an Error Raised by a Command"""

    if isinstance(err, (NotJoinable, FrameMismatch)):
        return EXIT_NOT_JOINABLE
    if isinstance(err, (ParseError, InvalidInput, MissingEntity)):
        return EXIT_INPUT
    if isinstance(err, LinSLAMError):
        return EXIT_NUMERIC
    if isinstance(err, OSError):
        return EXIT_OS
    raise err


def _gauss_newton(args : argparse.Namespace) -> GaussNewtonConfig:
    return GaussNewtonConfig(
        max_iters = args.max_iters,
        fix_headings = getattr(args, "fix_headings", False)
    )


def _read_maps(paths : Sequence[str]) -> list:
    if not paths:
        raise InvalidInput("at least one map file is required")
    return [read_map_file(path) for path in paths]


def _map_path(directory : str, index : int) -> str:
    return os.path.join(directory, f"submap_{index:04d}.lmap")


def cmd_simulate(args : argparse.Namespace) -> dict:
    cfg = ScenarioConfig(
        tag = args.dim,
        trajectory = args.trajectory,
        poses = args.poses,
        step = args.step,
        feature_density = args.feature_density,
        sensor_range = args.sensor_range,
        odometry_sigma = tuple(args.odometry_sigma),
        observation_sigma = args.observation_sigma,
        seed = args.seed,
        chunk_size = args.chunk_size,
        noise = not args.no_noise
    )

    truth, chunks = generate(cfg)
    write_raw_data(chunks, args.output)
    if args.truth:
        write_map_file(truth_map(truth), args.truth)

    return {
        "chunks" : len(chunks),
        "poses" : len(truth.poses()) + 1,
        "features" : len(truth.features()),
        "output" : args.output
    }


def cmd_build_maps(args : argparse.Namespace) -> dict:
    chunks = read_raw_data(args.raw)
    os.makedirs(args.out_dir, exist_ok = True)

    cfg, start = _gauss_newton(args), time.perf_counter()
    not_converged = 0
    for index, chunk in enumerate(chunks):
        pose = chunk.poses[0] if args.frame == "start" else max(chunk.poses)
        local = build_local_map(chunk, PoseFrame(pose), cfg, strict = args.strict)
        not_converged += not local.converged
        write_map_file(local, _map_path(args.out_dir, index))

    return {"maps" : len(chunks), "not_converged" : not_converged, "build_time" : time.perf_counter() - start}


def cmd_join(args : argparse.Namespace) -> dict:
    start = time.perf_counter()
    if args.raw:
        cfg = _gauss_newton(args)
        maps = [build_local_map(chunk, PoseFrame(chunk.poses[0]), cfg) for chunk in read_raw_data(args.raw)]
    else:
        maps = _read_maps(args.maps)
    loaded = time.perf_counter()

    if args.strategy == "seq":
        result = join_sequential(maps)
    else:
        result = join_divide_conquer(maps, threads = args.threads)
    joined = time.perf_counter()

    if args.output:
        write_map_file(result, args.output)
    if args.plot_data:
        write_plot_data(result, args.plot_data)

    return {
        "strategy" : args.strategy,
        "maps" : len(maps),
        "dim" : result.estimate.dim,
        "frame" : str(result.frame),
        "local_map_time" : loaded - start,
        "join_time" : joined - loaded,
        "total_time" : time.perf_counter() - start,
        "chi2" : chi2(result, maps)
    }


def cmd_eval(args : argparse.Namespace) -> dict:
    solution = read_map_file(args.solution)
    everything = not (args.chi2 or args.rmse or args.nees)

    kwargs = {}
    if (args.chi2 or everything) and args.maps:
        kwargs["maps"] = _read_maps(args.maps)
    if (args.rmse or everything) and args.reference:
        kwargs["reference"] = read_map_file(args.reference)
    if (args.nees or everything) and args.truth:
        kwargs["truth"] = read_map_file(args.truth)

    if args.chi2 and "maps" not in kwargs:
        raise InvalidInput("--chi2 needs --maps")
    if args.rmse and "reference" not in kwargs:
        raise InvalidInput("--rmse needs --reference")
    if args.nees and "truth" not in kwargs:
        raise InvalidInput("--nees needs --truth")

    report = evaluate(solution, **kwargs)
    if args.plot_data:
        write_plot_data(report, args.plot_data)

    return report.to_dict()


def cmd_oracle(args : argparse.Namespace) -> dict:
    maps = _read_maps(args.maps)
    cfg = _gauss_newton(args)

    if args.mode == "join":
        if len(maps) != 2:
            raise InvalidInput(f"--mode join needs exactly two maps, got {len(maps)}")
        left, right = prepare_pair(*maps)
        init = read_map_file(args.init) if args.init else join_two_maps(left, right)
        report = nonlinear_join(left, right, init.estimate, init.frame, cfg)
    else:
        init = read_map_file(args.init) if args.init else join_sequential(maps)
        report = full_nonlinear_ls(maps, init, cfg = cfg)

    if args.output:
        write_map_file(report.solution, args.output)

    return {
        "mode" : args.mode,
        "final_objective" : report.final_objective,
        "iterations" : report.iterations,
        "converged" : report.converged
    }


def cmd_complexity(args : argparse.Namespace) -> dict:
    rows = {}
    for n in args.n:
        report = complexity_model(ComplexityParams(O_G = args.og, S_G = args.sg, m = args.m, n = n))
        rows[n] = report.to_dict()
    return rows


def cmd_convert(args : argparse.Namespace) -> dict:
    graph = read_pose_graph(args.graph)
    chunks = partition_pose_graph(graph, args.chunk_size)
    os.makedirs(args.out_dir, exist_ok = True)

    cfg = _gauss_newton(args)
    for index, chunk in enumerate(chunks):
        local = build_local_map(chunk, PoseFrame(chunk.poses[0]), cfg)
        write_map_file(local, _map_path(args.out_dir, index))

    return {"maps" : len(chunks), "edges" : len(graph.edges), "warnings" : len(graph.warnings)}


def _solver_flags(parser : argparse.ArgumentParser) -> None:
    parser.add_argument("--max-iters", type = int, default = 50, help = "Maximum Gauss-Newton iterations.")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog = "linslam",
        description = "Large scale SLAM by joining local maps with linear least squares."
    )
    parser.add_argument("--version", action = "version", version = f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action = "count", default = 0, help = "Increase log verbosity (-v info, -vv debug).")
    parser.add_argument("--config", default = None, help = "YAML file of default flag values.")
    parser.add_argument("--json", action = "store_true", help = "Print the result as a JSON document.")

    commands = parser.add_subparsers(dest = "command", metavar = "COMMAND")
    commands.required = True

    sub = commands.add_parser("simulate", help = "Generate a synthetic dataset.")
    sub.add_argument("--dim", default = "2D", choices = ["2D", "3D"])
    sub.add_argument("--trajectory", default = "loop", choices = ["loop", "grid", "sphere"])
    sub.add_argument("--poses", type = int, default = 50)
    sub.add_argument("--step", type = float, default = 1.0, help = "Distance between poses (m).")
    sub.add_argument("--feature-density", type = float, default = 0.1, help = "Features per m^2 (or m^3).")
    sub.add_argument("--sensor-range", type = float, default = 4.0)
    sub.add_argument("--odometry-sigma", type = float, nargs = 2, default = [0.05, 0.01], metavar = ("TRANS", "ROT"))
    sub.add_argument("--observation-sigma", type = float, default = 0.05)
    sub.add_argument("--seed", type = int, default = 0)
    sub.add_argument("--chunk-size", type = int, default = 5)
    sub.add_argument("--no-noise", action = "store_true", help = "Write measurements consistent with the truth.")
    sub.add_argument("-o", "--output", required = True, help = "Raw data JSON file.")
    sub.add_argument("--truth", default = None, help = "Ground truth .lmap file.")
    sub.set_defaults(handler = cmd_simulate)

    sub = commands.add_parser("build-maps", help = "Build local maps from raw data chunks.")
    sub.add_argument("raw", help = "Raw data JSON file.")
    sub.add_argument("--out-dir", required = True)
    sub.add_argument("--frame", default = "start", choices = ["start", "end"], help = "Pose frame of each map.")
    sub.add_argument("--fix-headings", action = "store_true")
    sub.add_argument("--strict", action = "store_true", help = "Fail on a non converged map.")
    _solver_flags(sub)
    sub.set_defaults(handler = cmd_build_maps)

    sub = commands.add_parser("join", help = "Join local maps into a global map.")
    sub.add_argument("maps", nargs = "*", help = "Local map .lmap files.")
    sub.add_argument("--raw", default = None, help = "Raw data JSON file, the local maps are built first.")
    sub.add_argument("--strategy", default = "seq", choices = ["seq", "dc"])
    sub.add_argument("--threads", type = int, default = 1)
    sub.add_argument("-o", "--output", default = None, help = "Global map .lmap file.")
    sub.add_argument("--plot-data", default = None, help = "Plot data CSV file of the global map.")
    _solver_flags(sub)
    sub.set_defaults(handler = cmd_join)

    sub = commands.add_parser("eval", help = "Evaluate a solution.")
    sub.add_argument("solution")
    sub.add_argument("--maps", nargs = "+", default = [])
    sub.add_argument("--reference", default = None)
    sub.add_argument("--truth", default = None)
    sub.add_argument("--chi2", action = "store_true")
    sub.add_argument("--rmse", action = "store_true")
    sub.add_argument("--nees", action = "store_true")
    sub.add_argument("--plot-data", default = None, help = "Metrics CSV file.")
    sub.set_defaults(handler = cmd_eval)

    sub = commands.add_parser("oracle", help = "Reference nonlinear least squares solutions.")
    sub.add_argument("maps", nargs = "+")
    sub.add_argument("--mode", default = "full", choices = ["join", "full"])
    sub.add_argument("--init", default = None, help = "Initial solution .lmap, defaults to the linear result.")
    sub.add_argument("-o", "--output", default = None)
    _solver_flags(sub)
    sub.set_defaults(handler = cmd_oracle)

    sub = commands.add_parser("complexity", help = "Cost ratios of the joining strategies.")
    sub.add_argument("--og", type = int, required = True, help = "Number of observations.")
    sub.add_argument("--sg", type = int, required = True, help = "Number of state entities.")
    sub.add_argument("--m", type = int, default = 10, help = "Nonlinear iterations.")
    sub.add_argument("--n", type = int, nargs = "+", required = True, help = "Number(s) of local maps.")
    sub.set_defaults(handler = cmd_complexity)

    sub = commands.add_parser("convert", help = "Partition a pose graph into pose only local maps.")
    sub.add_argument("graph")
    sub.add_argument("--chunk-size", type = int, default = 10)
    sub.add_argument("--out-dir", required = True)
    _solver_flags(sub)
    sub.set_defaults(handler = cmd_convert)

    return parser


def _apply_config(parser : argparse.ArgumentParser, settings : dict) -> None:
    subparsers = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))

    known = set()
    for sub in subparsers.choices.values():
        known |= {action.dest for action in sub._actions}
        sub.set_defaults(**{k : v for k, v in settings.items() if k in {a.dest for a in sub._actions}})

    unknown = sorted(set(settings) - known)
    if unknown:
        raise InvalidInput(f"unknown configuration keys: {unknown}")


def _format(result : dict, as_json : bool) -> str:
    if as_json:
        return json.dumps(result, indent = 2, default = str)

    lines = []
    for key, value in result.items():
        if isinstance(value, dict):
            lines.append(" ".join([f"n={key}"] + [f"{k}={v:.4f}" for k, v in value.items()]))
        elif isinstance(value, float):
            lines.append(f"{key}={value:.10g}")
        else:
            lines.append(f"{key}={value}")
    return "\n".join(lines)


def main(argv : List[str] = None) -> int:
    """
    Run a Command and Return its Exit Code

    .. code-block:: python

        main(["complexity", "--og", "52288", "--sg", "7197", "--m", "10", "--n", "10"])
        >>> 0
    """

    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)

    try:
        preparser = argparse.ArgumentParser(add_help = False)
        preparser.add_argument("--config", default = None)
        preparser.add_argument("-v", "--verbose", action = "count", default = 0)
        pre, _ = preparser.parse_known_args(argv)

        configure_logging(resolve_level(pre.verbose))
        if pre.config:
            _apply_config(parser, load_config(pre.config))
    except (LinSLAMError, OSError) as err:
        print(f"linslam: error: {err}", file = sys.stderr)
        return exit_code(err)

    try:
        args = parser.parse_args(argv)
        if args.command == "join" and bool(args.maps) == bool(args.raw):
            parser.error("join needs map files or --raw, not both")
    except SystemExit as err:
        return EXIT_USAGE if err.code else EXIT_OK

    try:
        result = args.handler(args)
    except (LinSLAMError, OSError) as err:
        logger.debug("command %s failed", args.command, exc_info = True)
        print(f"linslam: error: {err}", file = sys.stderr)
        return exit_code(err)

    print(_format(result, args.json))
    return EXIT_OK

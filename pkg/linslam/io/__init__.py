# -*- encoding: utf-8 -*-

"""
Dataset Ingestion and Result Export

    * ``.lmap`` local map exchange files, :mod:`linslam.io.mapfile`;
    * g2o style pose graph files and their partition into pose only
      chunks, :mod:`linslam.io.posegraph`, :mod:`linslam.io.partition`;
    * JSON raw data chunks, :mod:`linslam.io.rawdata`;
    * CSV plot data, :mod:`linslam.io.plotdata`.

The grammar of every format is documented in ``docs/formats.md``.
"""

from linslam.io.mapfile import (
    format_map,
    parse_frame,
    parse_map,
    read_map_file,
    write_map_file
)
from linslam.io.posegraph import (
    PoseGraph,
    format_pose_graph,
    parse_pose_graph,
    read_pose_graph,
    write_pose_graph
)
from linslam.io.partition import chunk_bounds, partition_pose_graph
from linslam.io.rawdata import read_raw_data, write_raw_data
from linslam.io.plotdata import marginal_sigmas, write_plot_data

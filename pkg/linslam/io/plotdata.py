# -*- encoding: utf-8 -*-

"""
Plot Data Export (CSV)

A map is written as one row per entry, its position and the marginal
standard deviation of each coordinate, ``sqrt((I^-1)_ii)``, obtained by
solving ``I @ x = e_i`` with a single sparse factorization (the
covariance is never formed). Coordinates fixed by the frame have a
zero deviation. A singular information matrix leaves the deviation
fields empty.

A :class:`linslam.evaluation.MetricReport` is written as ``metric,value``
rows.
"""

import csv
import logging

from typing import Union

import numpy as np

from linslam.core.sparse import SPDFactor
from linslam.core.state import DimensionTag, LocalMap
from linslam.errors import SingularSystem
from linslam.evaluation import MetricReport

logger = logging.getLogger(__name__)

def plot_header(tag : DimensionTag) -> list:
    axes = ["x", "y", "z"][:tag.trans_dim]
    return ["kind", "id"] + axes + [f"sigma_{axis}" for axis in axes]


def marginal_sigmas(local : LocalMap, columns : np.ndarray) -> np.ndarray:
    """
    Marginal Standard Deviations of Selected State Coordinates

    :raises SingularSystem: The information matrix is singular.
    """

    columns = np.asarray(columns, dtype = int)
    if not columns.size:
        return np.zeros(0)

    factor = SPDFactor(local.info)
    units = np.zeros((local.estimate.dim, columns.size))
    units[columns, np.arange(columns.size)] = 1.0

    variances = factor.solve(units)[columns, np.arange(columns.size)]
    if not np.all(np.isfinite(variances)) or np.any(variances < 0.0):
        raise SingularSystem("marginal variances are not finite and positive")
    return np.sqrt(variances)


def _map_rows(local : LocalMap) -> list:
    estimate, d = local.estimate, local.tag.trans_dim

    # state columns of the position coordinates, -1 marks a frame fixed coordinate
    layout = []
    for key in estimate.keys:
        index = estimate.indices(key)
        position = index[:d] if key.is_pose else np.concatenate([index, -np.ones(d - index.size, dtype = int)])
        layout.append((key, position))

    columns = np.array([c for _, position in layout for c in position if c >= 0], dtype = int)
    try:
        sigmas = dict(zip(columns.tolist(), marginal_sigmas(local, columns).tolist()))
    except SingularSystem as err:
        logger.warning("information matrix is singular, sigmas left empty: %s", err)
        sigmas = None

    rows = []
    for key, position in layout:
        value = estimate.value(key)
        coordinates = [float(value[i]) if c >= 0 else 0.0 for i, c in enumerate(position)]
        if sigmas is None:
            deviations = [""] * d
        else:
            deviations = [sigmas[c] if c >= 0 else 0.0 for c in position]
        rows.append(["pose" if key.is_pose else "feature", key.id] + coordinates + deviations)

    return rows


def write_plot_data(source : Union[LocalMap, MetricReport], path : str) -> None:
    """
    Write the Plot Data of a Map or of a Metric Report

    .. code-block:: python

        write_plot_data(global_map, "global.csv")
        # kind,id,x,y,sigma_x,sigma_y
        # feature,7,1.0,0.0,1.0,1.0
    """

    with open(path, "w", encoding = "utf-8", newline = "") as handle:
        writer = csv.writer(handle)

        if isinstance(source, MetricReport):
            writer.writerow(["metric", "value"])
            writer.writerows(source.to_dict().items())
        else:
            writer.writerow(plot_header(source.tag))
            writer.writerows(_map_rows(source))

    logger.debug("plot data written to %s", path)

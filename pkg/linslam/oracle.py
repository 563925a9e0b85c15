# -*- encoding: utf-8 -*-

"""
Reference Nonlinear Solvers for Verification

Each map is an integrated observation of the global state: its
estimate is compared with the global state moved into the frame of
the map, weighted by the map information matrix. Minimizing the sum
of these terms by Gauss-Newton gives the traditional (nonlinear) map
joining of two maps, or the full nonlinear least squares over all the
local maps, used to check the linear joining results.

The same residual, :func:`map_residual`, is used by the chi-square
evaluation of a solution.
"""

import logging

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sps

from scipy.linalg import cho_factor, cho_solve, LinAlgError

from linslam.core.frames import frame_change
from linslam.core.geometry import wrap_angles
from linslam.core.optimize import GaussNewtonConfig, gauss_newton
from linslam.core.sparse import SparseSymMatrix, solve_spd
from linslam.core.state import (
    DimensionTag,
    FrameDescriptor,
    LocalMap,
    StateVector
)
from linslam.errors import InvalidInput, MissingEntity, NotConverged, SingularSystem

logger = logging.getLogger(__name__)

# normal matrices below this size are solved with dense algebra
DENSE_LIMIT = 500

@dataclass(frozen = True, eq = False)
class OracleReport:
    """
    Result of a Reference Solve

    :type  final_objective: float
    :param final_objective: Weighted sum of squared map residuals at
        the solution, the chi-square of the solution.

    :type  iterations: int
    :param iterations: Number of Gauss-Newton linearizations.

    :type  max_step: float
    :param max_step: Largest infinity norm of the computed steps.
    """

    solution : LocalMap
    final_objective : float
    iterations : int
    converged : bool
    max_step : float = 0.0


def map_residual(
    solution : StateVector,
    frame : FrameDescriptor,
    local : LocalMap,
    tag : DimensionTag = None
) -> tuple:
    """
    Residual of a Map at a Global Solution

    The solution is moved into the frame of the map (only the entries
    of the map are produced) and the map estimate is subtracted, angle
    residuals are wrapped.

    :raises MissingEntity: An entry of the map (or an entity of its
        frame) is not recoverable from the solution.

    :rtype:  tuple
    :return: The residual vector and its sparse Jacobian w.r.t. the
        solution.
    """

    tag = tag or solution.tag
    predicted, jacobian = frame_change(solution, frame, local.frame, tag, keys = local.estimate.keys)

    residual = predicted.as_array() - local.estimate.as_array()
    angles = local.estimate.angle_indices()
    residual[angles] = wrap_angles(residual[angles])
    return residual, jacobian


def _solve(hessian : sps.spmatrix, gradient : np.ndarray) -> np.ndarray:
    if hessian.shape[0] == 0 or hessian.shape[0] >= DENSE_LIMIT:
        return solve_spd(hessian, gradient)

    try:
        return cho_solve(cho_factor(sps.csc_matrix(hessian).toarray(), lower = True), gradient)
    except LinAlgError as err:
        raise SingularSystem(f"oracle normal matrix is not positive definite: {err}") from err


class _OracleProblem:

    def __init__(self, maps : Sequence[LocalMap], frame : FrameDescriptor, layout : StateVector) -> None:
        self.maps = list(maps)
        self.frame = frame
        self.layout = layout
        self.angles = layout.angle_indices()

    def objective(self, x : np.ndarray) -> float:
        solution = StateVector.from_array(self.layout, x)
        total = 0.0
        for local in self.maps:
            residual, _ = map_residual(solution, self.frame, local)
            total += float(residual @ (local.info @ residual))
        return total

    def linearize(self, x : np.ndarray) -> tuple:
        solution = StateVector.from_array(self.layout, x)
        dim = self.layout.dim

        hessian = sps.csc_matrix((dim, dim))
        gradient, total = np.zeros(dim), 0.0
        for local in self.maps:
            residual, jacobian = map_residual(solution, self.frame, local)
            weighted = local.info.to_scipy()

            total += float(residual @ (weighted @ residual))
            hessian = hessian + jacobian.T @ weighted @ jacobian
            gradient += jacobian.T @ (weighted @ residual)

        return total, sps.csc_matrix(hessian), gradient

    def retract(self, x : np.ndarray, step : np.ndarray) -> np.ndarray:
        out = x + step
        out[self.angles] = wrap_angles(out[self.angles])
        return out


def _layout(maps : Sequence[LocalMap], init : StateVector, frame : FrameDescriptor) -> StateVector:
    tag = init.tag
    fixed = set(frame.entities()) - set(frame.partial_dims(tag))

    needed = set()
    for local in maps:
        if local.tag is not tag:
            raise InvalidInput("all maps must share the dimension tag of the initial state")
        needed |= local.entity_keys()
    needed -= fixed

    missing = sorted(str(key) for key in needed if key not in init)
    if missing:
        raise MissingEntity(f"initial state misses {missing}")

    return init.subset(sorted(needed))


def _run(maps : Sequence[LocalMap], init : StateVector, frame : FrameDescriptor, cfg : GaussNewtonConfig, **kwargs) -> OracleReport:
    strict = kwargs.get("strict", False)

    layout = _layout(maps, init, frame)
    problem = _OracleProblem(maps, frame, layout)
    result = gauss_newton(
        problem.linearize, problem.objective, problem.retract,
        layout.as_array(), cfg, solve = _solve
    )

    solution = LocalMap(
        frame = frame,
        estimate = StateVector.from_array(layout, result.x),
        info = SparseSymMatrix.from_scipy(result.hessian),
        converged = result.converged,
        iterations = result.linearizations,
        objective = result.objective
    )
    report = OracleReport(
        solution = solution,
        final_objective = max(result.objective, 0.0),
        iterations = result.linearizations,
        converged = result.converged,
        max_step = result.max_step
    )

    logger.debug(
        "oracle over %d map(s): objective %.12g, %d iterations, converged %s",
        len(maps), report.final_objective, report.iterations, report.converged
    )

    if not result.converged:
        if strict:
            raise NotConverged(f"oracle not converged in {cfg.max_iters} iterations", result = report)
        logger.warning("oracle did not converge (objective %.6g)", result.objective)

    return report


def nonlinear_join(
    m1 : LocalMap,
    m2 : LocalMap,
    init : StateVector,
    target_frame : FrameDescriptor,
    cfg : GaussNewtonConfig = None,
    **kwargs
) -> OracleReport:
    """
    Traditional Two Map Joining by Nonlinear Least Squares

    The joint state is estimated directly in ``target_frame``, each map
    residual going through the (nonlinear) frame change into the frame
    of the map, so the maps do not need to share a frame.

    :type  init: StateVector
    :param init: Initial joint state in ``target_frame``, it must
        cover every entity of both maps not fixed by the target frame.

    Keyword Arguments
    -----------------

        * **strict** (*bool*): Raise :class:`NotConverged` instead of
            returning a report flagged ``converged = False``.

    :rtype:  OracleReport
    :return: The Gauss-Newton minimizer and its convergence record.
    """

    return _run([m1, m2], init, target_frame, cfg or GaussNewtonConfig(), **kwargs)


def full_nonlinear_ls(
    maps : Sequence[LocalMap],
    init : Union[StateVector, LocalMap],
    frame : FrameDescriptor = None,
    cfg : GaussNewtonConfig = None,
    **kwargs
) -> OracleReport:
    """
    Full Nonlinear Least Squares over All Local Maps

    .. code-block:: python

        global_map = linslam.join_sequential(maps)
        report = full_nonlinear_ls(maps, global_map)
        report.final_objective <= linslam.chi2(global_map.estimate, maps, global_map.frame)
        >>> True

    :type  init: StateVector | LocalMap
    :param init: Initial global state, a map provides its own frame.

    :type  frame: FrameDescriptor
    :param frame: Frame of the solution, required when ``init`` is a
        bare state vector.
    """

    if isinstance(init, LocalMap):
        frame = frame or init.frame
        if frame != init.frame:
            raise InvalidInput(f"initial map is in frame {init.frame}, not {frame}")
        init = init.estimate
    elif frame is None:
        raise InvalidInput("the frame of the initial state is required")

    maps = list(maps)
    if not maps:
        raise InvalidInput("at least one map is required")

    return _run(maps, init, frame, cfg or GaussNewtonConfig(), **kwargs)

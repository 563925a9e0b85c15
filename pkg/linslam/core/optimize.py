# -*- encoding: utf-8 -*-

"""
Damping Free Gauss-Newton Iterations with Step Halving

The loop is shared by the local map builder and by the reference
(oracle) solvers, the caller only provides the problem as three
callables over a flat parameter vector.
"""

import logging

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sps

from linslam.core.sparse import solve_spd
from linslam.errors import InvalidInput

logger = logging.getLogger(__name__)

MAX_HALVINGS = 10

@dataclass(frozen = True)
class GaussNewtonConfig:
    """
    Stopping Rules of the Gauss-Newton Iterations

    :type  max_iters: int
    :param max_iters: Maximum number of linearizations.

    :type  rel_tol: float
    :param rel_tol: Converged when an accepted step decreases the
        objective by less than ``rel_tol`` times its previous value.

    :type  step_tol: float
    :param step_tol: Converged when the infinity norm of the computed
        step falls below this value.

    :type  fix_headings: bool
    :param fix_headings: Hold pose angles at their initial values, the
        problem is then linear for Cartesian observations and
        translation odometry.
    """

    max_iters : int = 50
    rel_tol : float = 1e-14
    step_tol : float = 1e-12
    fix_headings : bool = False

    def __post_init__(self) -> None:
        if self.max_iters < 1:
            raise InvalidInput(f"max_iters must be >= 1, got {self.max_iters}")
        if not (self.rel_tol > 0 and self.step_tol > 0):
            raise InvalidInput("tolerances must be strictly positive")


@dataclass
class GaussNewtonResult:
    x : np.ndarray
    objective : float
    hessian : sps.csc_matrix
    iterations : int
    linearizations : int
    converged : bool
    max_step : float


def _newton_step(hessian : sps.spmatrix, gradient : np.ndarray, free : np.ndarray, solve : Callable) -> np.ndarray:
    step = np.zeros_like(gradient)
    if free is None:
        return -solve(hessian, gradient)

    hessian = sps.csc_matrix(hessian)
    step[free] = -solve(hessian[free][:, free], gradient[free])
    return step


def gauss_newton(
    linearize : Callable,
    objective : Callable,
    retract : Callable,
    x0 : np.ndarray,
    cfg : GaussNewtonConfig,
    free : np.ndarray = None,
    solve : Callable = solve_spd
) -> GaussNewtonResult:
    """
    Minimize a Weighted Sum of Squared Residuals

    :type  linearize: Callable
    :param linearize: ``x -> (objective, H, g)`` with the Gauss-Newton
        normal matrix ``H = J.T @ W @ J`` and gradient ``g = J.T @ W @ e``.

    :type  objective: Callable
    :param objective: ``x -> objective``, used by the step halving.

    :type  retract: Callable
    :param retract: ``(x, dx) -> x + dx`` including any wrapping.

    :type  free: np.ndarray
    :param free: Indices updated by the iterations, others are held
        fixed. Defaults to all.

    :type  solve: Callable
    :param solve: ``(H, g) -> H^-1 g`` linear solver, defaults to the
        sparse :func:`linslam.core.sparse.solve_spd`.

    :rtype:  GaussNewtonResult
    :return: The final parameters, objective and normal matrix (at the
        returned parameters) with the convergence record.
        ``iterations`` counts the accepted steps and ``linearizations``
        the normal matrices assembled (and solved).
    """

    x = np.asarray(x0, dtype = float).copy()
    value, hessian, gradient = linearize(x)

    iterations, linearizations, converged, max_step = 0, 0, False, 0.0
    while linearizations < cfg.max_iters:
        step = _newton_step(hessian, gradient, free, solve)
        linearizations += 1

        step_norm = float(np.abs(step).max()) if step.size else 0.0
        max_step = max(max_step, step_norm)
        if step_norm < cfg.step_tol:
            converged = True
            break

        scale = 1.0
        for _ in range(MAX_HALVINGS + 1):
            candidate = retract(x, scale * step)
            candidate_value = objective(candidate)
            if candidate_value <= value:
                break
            scale *= 0.5
        else:
            # no decrease along the step, the minimum is reached up to rounding
            logger.debug("no decrease after %d halvings, objective %.12g", MAX_HALVINGS, value)
            converged = True
            break

        decrease = value - candidate_value
        previous = value

        x = candidate
        iterations += 1
        value, hessian, gradient = linearize(x)
        logger.debug("iteration %d: objective %.12g (step %.3e, scale %g)", iterations, value, step_norm, scale)

        if decrease <= cfg.rel_tol * previous:
            converged = True
            break

    return GaussNewtonResult(
        x = x,
        objective = float(value),
        hessian = sps.csc_matrix(hessian),
        iterations = iterations,
        linearizations = linearizations,
        converged = converged,
        max_step = max_step
    )

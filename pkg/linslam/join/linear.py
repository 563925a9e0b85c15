# -*- encoding: utf-8 -*-

"""
Linear Least Squares Fusion of Two Maps in the Same Frame

Both map estimates are treated as direct observations of the joint
state ``X``: ``Z = A @ X + noise`` with ``Z`` the stacked estimates,
``A`` a selection matrix of identity blocks and the noise weighted by
the block diagonal information ``I_Z``. The fused estimate solves the
normal equations ``A.T @ I_Z @ A @ X = A.T @ I_Z @ Z`` and its
information matrix is ``A.T @ I_Z @ A``.
"""

import logging

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from linslam.core.geometry import wrap_angles
from linslam.core.sparse import SparseSymMatrix, solve_spd
from linslam.core.state import (
    DimensionTag,
    FrameDescriptor,
    LocalMap,
    StateVector
)
from linslam.join.classify import JoinKind

logger = logging.getLogger(__name__)

@dataclass(frozen = True, eq = False)
class LinearJoinSystem:
    """
    Sparse Linear System of a Two Map Join

    :type  A: scipy.sparse.csr_matrix
    :param A: Selection matrix, one identity block per map entry.

    :type  Z: np.ndarray
    :param Z: Stacked estimates of the first then the second map.

    :type  I_Z: SparseSymMatrix
    :param I_Z: Block diagonal information of ``Z``.

    :type  layout: StateVector
    :param layout: Key layout of the joint state (values are the
        first map's estimate where available, zero elsewhere), its
        keys give the column to key correspondence of ``A``.
    """

    A : sps.csr_matrix
    Z : np.ndarray
    I_Z : SparseSymMatrix
    layout : StateVector
    frame : FrameDescriptor

    @property
    def key_map(self) -> tuple:
        return tuple((key, self.layout.slice(key)) for key in self.layout.keys)

    @property
    def tag(self) -> DimensionTag:
        return self.layout.tag

    def normal_matrix(self) -> sps.csc_matrix:
        return sps.csc_matrix(self.A.T @ self.I_Z.to_scipy() @ self.A)


def joint_layout(m1 : LocalMap, m2 : LocalMap, common) -> list:
    """Joint State Keys: First Map Only, Second Map Only, Common"""

    keys1, keys2 = set(m1.estimate.keys), set(m2.estimate.keys)
    return sorted(keys1 - keys2) + sorted(keys2 - keys1) + sorted(common)


def assemble_system(m1 : LocalMap, m2 : LocalMap, kind : JoinKind) -> LinearJoinSystem:
    """
    Assemble the Selection Matrix, Stacked Estimates and Information

    :type  m2: LocalMap
    :param m2: Second map, with its common angles already wrapped
        w.r.t. the first one.

    :rtype:  LinearJoinSystem
    :return: The system whose weighted least squares solution is the
        fused map.
    """

    keys = joint_layout(m1, m2, kind.common)
    partial = {**m2.estimate.partial_dims(), **m1.estimate.partial_dims()}
    layout = StateVector(
        [
            (key, m1.estimate.value(key) if key in m1.estimate else m2.estimate.value(key))
            for key in keys
        ],
        m1.tag, partial = partial
    )

    columns = np.concatenate([
        layout.index_of(m1.estimate.keys),
        layout.index_of(m2.estimate.keys)
    ]).astype(np.int64)

    rows = np.arange(columns.size)
    A = sps.csr_matrix(
        (np.ones(columns.size), (rows, columns)),
        shape = (columns.size, layout.dim)
    )

    n1 = m1.estimate.dim
    I_Z = m1.info.embed(np.arange(n1), columns.size) + m2.info.embed(n1 + np.arange(m2.estimate.dim), columns.size)
    Z = np.concatenate([m1.estimate.as_array(), m2.estimate.as_array()])

    logger.debug("join system: %d observations, %d unknowns", A.shape[0], A.shape[1])
    return LinearJoinSystem(A = A, Z = Z, I_Z = I_Z, layout = layout, frame = m1.frame)


def solve_join(system : LinearJoinSystem) -> tuple:
    """
    Solve the Normal Equations of a Join

    .. code-block:: python

        # common feature at 1.0 (info 1) and at 3.0 (info 1)
        estimate, info = solve_join(system)
        >>> fused value 2.0, information 2.0

    :raises SingularSystem: ``A.T @ I_Z @ A`` is not positive definite.

    :rtype:  tuple
    :return: The joint estimate (pose angles wrapped) and its
        information matrix ``A.T @ I_Z @ A``.
    """

    normal = system.normal_matrix()
    rhs = system.A.T @ (system.I_Z @ system.Z)
    solution = solve_spd(normal, rhs)

    angles = system.layout.angle_indices()
    solution[angles] = wrap_angles(solution[angles])

    return StateVector.from_array(system.layout, solution), SparseSymMatrix.from_scipy(normal)

# -*- encoding: utf-8 -*-

"""
Sparse Symmetric Matrices and Positive Definite Solves

Information matrices are kept as the lower triangle of a symmetric
matrix in triplet (coordinate) form and are only mirrored into a full
:mod:`scipy.sparse` matrix when an algebraic operation needs it.

Symmetric positive definite systems are factorized with CHOLMOD
(``scikit-sparse``) using the approximate minimum degree ordering when
the package is available, else with the SuperLU factorization of
:mod:`scipy` restricted to a symmetric (diagonal) pivoting so that the
pivots can be used to detect a matrix that is not positive definite.
"""

import logging

import numpy as np
import scipy.sparse as sps

from scipy.sparse.linalg import splu

from linslam.errors import InvalidInput, SingularSystem

try:
    # ? scikit-sparse needs the suitesparse headers, not always present
    from sksparse import cholmod
    _has_sksparse_cholmod = True
except ImportError:
    _has_sksparse_cholmod = False

logger = logging.getLogger(__name__)

# relative pivot floor of the LU fall-back factorization
PIVOT_TOLERANCE = 1e-14

class SparseSymMatrix:
    """
    Immutable Sparse Symmetric Matrix (Lower Triangle Triplets)

    Triplets may be given for any triangle, an entry ``(i, j)`` with
    ``i < j`` is mirrored to ``(j, i)`` and duplicated coordinates are
    summed, so the stored form is canonical: strictly one value per
    lower triangle coordinate, sorted by ``(row, col)``, explicit zeros
    removed.

    :type  dim: int
    :param dim: Number of rows (and columns) of the matrix.

    :type  rows, cols, vals: iterable
    :param rows, cols, vals: Coordinates and values of the triplets.
    """

    __slots__ = ("_dim", "_rows", "_cols", "_vals")

    def __init__(self, dim : int, rows = (), cols = (), vals = ()) -> None:
        rows = np.asarray(rows, dtype = np.int64).ravel()
        cols = np.asarray(cols, dtype = np.int64).ravel()
        vals = np.asarray(vals, dtype = float).ravel()

        if dim < 0:
            raise InvalidInput(f"matrix dimension must be >= 0, got {dim}")
        if not (rows.size == cols.size == vals.size):
            raise InvalidInput("triplet arrays must have the same length")
        if rows.size and (min(rows.min(), cols.min()) < 0 or max(rows.max(), cols.max()) >= dim):
            raise InvalidInput(f"triplet index out of range for dimension {dim}")
        if not np.all(np.isfinite(vals)):
            raise InvalidInput("matrix values must be finite")

        lower = sps.coo_matrix(
            (vals, (np.maximum(rows, cols), np.minimum(rows, cols))),
            shape = (dim, dim)
        ).tocsr()
        lower.sum_duplicates()
        lower.eliminate_zeros()
        lower = lower.tocoo()

        order = np.lexsort((lower.col, lower.row))
        self._dim = int(dim)
        self._rows = lower.row[order].astype(np.int64)
        self._cols = lower.col[order].astype(np.int64)
        self._vals = lower.data[order].astype(float)

        for array in (self._rows, self._cols, self._vals):
            array.flags.writeable = False

    @classmethod
    def from_dense(cls, matrix : np.ndarray) -> "SparseSymMatrix":
        """Build from a Dense Symmetric Array (the Lower Triangle is Read)"""

        matrix = np.asarray(matrix, dtype = float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise InvalidInput(f"expected a square matrix, got shape {matrix.shape}")

        rows, cols = np.tril_indices(matrix.shape[0])
        vals = matrix[rows, cols]
        keep = vals != 0.0
        return cls(matrix.shape[0], rows[keep], cols[keep], vals[keep])

    @classmethod
    def from_scipy(cls, matrix : sps.spmatrix) -> "SparseSymMatrix":
        """Build from a Symmetric :mod:`scipy.sparse` Matrix"""

        lower = sps.tril(sps.coo_matrix(matrix)).tocoo()
        return cls(matrix.shape[0], lower.row, lower.col, lower.data)

    @classmethod
    def identity(cls, dim : int, scale : float = 1.0) -> "SparseSymMatrix":
        index = np.arange(dim)
        return cls(dim, index, index, np.full(dim, float(scale)))

    @classmethod
    def zeros(cls, dim : int) -> "SparseSymMatrix":
        return cls(dim)

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def nnz(self) -> int:
        """Number of Stored (Lower Triangle) Triplets"""

        return int(self._vals.size)

    @property
    def triplets(self) -> list:
        return list(zip(self._rows.tolist(), self._cols.tolist(), self._vals.tolist()))

    def to_scipy(self) -> sps.csc_matrix:
        """Full (Mirrored) Matrix in Compressed Sparse Column Format"""

        lower = sps.coo_matrix((self._vals, (self._rows, self._cols)), shape = (self._dim, self._dim))
        full = lower + lower.T - sps.diags(lower.diagonal())
        return sps.csc_matrix(full)

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def diagonal(self) -> np.ndarray:
        out = np.zeros(self._dim)
        mask = self._rows == self._cols
        out[self._rows[mask]] = self._vals[mask]
        return out

    def trace(self) -> float:
        return float(self.diagonal().sum())

    def submatrix(self, index : np.ndarray) -> "SparseSymMatrix":
        """Principal Sub-Matrix over the Given (Ordered) Indices"""

        index = np.asarray(index, dtype = np.int64)
        return SparseSymMatrix.from_scipy(self.to_scipy()[index][:, index])

    def congruence(self, jacobian : sps.spmatrix) -> "SparseSymMatrix":
        """
        Congruence Transform ``J.T @ self @ J``

        Used to propagate an information matrix through a change of
        variables whose Jacobian (old w.r.t. new) is ``J``.
        """

        jacobian = sps.csc_matrix(jacobian)
        if jacobian.shape[0] != self._dim:
            raise InvalidInput(
                f"jacobian has {jacobian.shape[0]} rows for a matrix of dimension {self._dim}"
            )

        product = jacobian.T @ self.to_scipy() @ jacobian
        return SparseSymMatrix.from_scipy(product)

    def embed(self, index : np.ndarray, dim : int) -> "SparseSymMatrix":
        """Scatter the Matrix into a Larger One, Row ``i`` -> ``index[i]``"""

        index = np.asarray(index, dtype = np.int64)
        return SparseSymMatrix(dim, index[self._rows], index[self._cols], self._vals)

    def __add__(self, other : "SparseSymMatrix") -> "SparseSymMatrix":
        if not isinstance(other, SparseSymMatrix):
            return NotImplemented
        if other.dim != self.dim:
            raise InvalidInput(f"dimension mismatch {self.dim} != {other.dim}")

        return SparseSymMatrix(
            self._dim,
            np.concatenate([self._rows, other._rows]),
            np.concatenate([self._cols, other._cols]),
            np.concatenate([self._vals, other._vals])
        )

    def __mul__(self, scale : float) -> "SparseSymMatrix":
        return SparseSymMatrix(self._dim, self._rows, self._cols, self._vals * float(scale))

    __rmul__ = __mul__

    def __matmul__(self, vector : np.ndarray) -> np.ndarray:
        return self.to_scipy() @ np.asarray(vector, dtype = float)

    def __eq__(self, other : object) -> bool:
        if not isinstance(other, SparseSymMatrix):
            return NotImplemented

        return (
            self._dim == other._dim
            and np.array_equal(self._rows, other._rows)
            and np.array_equal(self._cols, other._cols)
            and np.array_equal(self._vals, other._vals)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"SparseSymMatrix(dim={self._dim}, nnz={self.nnz})"


def _as_csc(matrix) -> sps.csc_matrix:
    if isinstance(matrix, SparseSymMatrix):
        return matrix.to_scipy()
    elif sps.issparse(matrix):
        return sps.csc_matrix(matrix)

    return sps.csc_matrix(np.asarray(matrix, dtype = float))


class SPDFactor:
    """
    Sparse Cholesky-type Factorization of a Positive Definite Matrix

    The factorization is computed once and reused for any number of
    right hand sides (vectors or ``(n, k)`` blocks).

    :type  matrix: SparseSymMatrix | scipy.sparse.spmatrix
    :param matrix: Symmetric matrix to factorize.

    :raises SingularSystem: When the matrix is not (numerically)
        positive definite.
    """

    def __init__(self, matrix) -> None:
        self.matrix = _as_csc(matrix)
        self.dim = self.matrix.shape[0]
        self.backend = "cholmod" if _has_sksparse_cholmod else "superlu"

        if self.dim == 0:
            self._factor = None
        elif _has_sksparse_cholmod:
            self._factor = self._cholmod(self.matrix)
        else:
            self._factor = self._superlu(self.matrix)

    @staticmethod
    def _cholmod(matrix : sps.csc_matrix):
        try:
            return cholmod.cholesky(matrix, ordering_method = "amd")
        except cholmod.CholmodNotPositiveDefiniteError as err:
            raise SingularSystem(f"matrix is not positive definite: {err}") from err
        except cholmod.CholmodError as err:
            raise SingularSystem(f"cholesky factorization failed: {err}") from err

    @staticmethod
    def _superlu(matrix : sps.csc_matrix):
        try:
            factor = splu(
                matrix,
                permc_spec = "MMD_AT_PLUS_A",
                diag_pivot_thresh = 0.0,
                options = dict(SymmetricMode = True)
            )
        except RuntimeError as err:
            raise SingularSystem(f"factorization failed: {err}") from err

        # with diagonal pivoting of a symmetric matrix, U holds the
        # cholesky pivots and must be strictly positive
        pivots = factor.U.diagonal()
        scale = max(np.abs(matrix.diagonal()).max(), np.finfo(float).tiny)
        if np.any(pivots <= PIVOT_TOLERANCE * scale):
            raise SingularSystem(
                f"matrix is not positive definite (min pivot {pivots.min():.3e})"
            )

        return factor

    def solve(self, rhs : np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype = float)
        if rhs.shape[0] != self.dim:
            raise InvalidInput(f"right hand side has {rhs.shape[0]} rows, expected {self.dim}")

        if self.dim == 0:
            return rhs.copy()

        return np.asarray(self._factor(rhs) if self.backend == "cholmod" else self._factor.solve(rhs))


def solve_spd(matrix, rhs : np.ndarray) -> np.ndarray:
    """
    Solve a Sparse Symmetric Positive Definite System

    Factorizes the matrix with a fill-reducing ordering and performs
    one step of iterative refinement on the solution.

    .. code-block:: python

        solve_spd(SparseSymMatrix.from_dense(np.diag([2.0, 4.0])), [2.0, 4.0])
        >>> array([1., 1.])

    :type  matrix: SparseSymMatrix | scipy.sparse.spmatrix
    :param matrix: The symmetric positive definite matrix ``M``.

    :type  rhs: np.ndarray
    :param rhs: Right hand side vector (or ``(n, k)`` block) ``b``.

    :raises SingularSystem: The matrix is not positive definite.

    :rtype:  np.ndarray
    :return: The solution ``x`` of ``M @ x = b``.
    """

    factor = SPDFactor(matrix)
    rhs = np.asarray(rhs, dtype = float)

    solution = factor.solve(rhs)
    if factor.dim:
        solution = solution + factor.solve(rhs - factor.matrix @ solution)

    if not np.all(np.isfinite(solution)):
        raise SingularSystem("solution of the linear system is not finite")

    return solution


def is_psd(matrix) -> bool:
    """
    Check a Symmetric Matrix is Positive Semi-Definite

    The matrix shifted by a ridge of ``1e-12 * trace / dim`` must admit
    a Cholesky factorization.
    """

    matrix = _as_csc(matrix)
    dim = matrix.shape[0]
    if dim == 0:
        return True

    diagonal = matrix.diagonal()
    if np.any(diagonal < 0.0):
        return False

    trace = float(diagonal.sum())
    if trace == 0.0:
        # a psd matrix with a zero diagonal is the zero matrix
        return matrix.count_nonzero() == 0

    ridge = 1e-12 * trace / dim
    try:
        SPDFactor(matrix + ridge * sps.identity(dim, format = "csc"))
    except SingularSystem:
        return False

    return True

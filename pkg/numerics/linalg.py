"""
Dense matrices and the cyclic Jacobi symmetric eigen-solver
"""
import logging
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from errors import InvalidInputError, NumericalError, ShapeError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DenseMatrix:
    """Row-major float64 matrix with finite entries"""
    rows: int
    cols: int
    data: np.ndarray

    def __post_init__(self):
        data = np.ascontiguousarray(self.data, dtype=np.float64).reshape(-1)
        if data.size != self.rows * self.cols:
            raise ShapeError(f"data length {data.size} != {self.rows} x {self.cols}")
        if not np.all(np.isfinite(data)):
            raise InvalidInputError("matrix entries must be finite")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_array(cls, array) -> "DenseMatrix":
        array = np.asarray(array, dtype=np.float64)
        if array.ndim != 2:
            raise ShapeError(f"expected a 2-D array, got shape {array.shape}")
        return cls(array.shape[0], array.shape[1], array)

    def to_array(self) -> np.ndarray:
        return self.data.reshape(self.rows, self.cols).copy()


MatrixLike = Union[DenseMatrix, np.ndarray]


def _as_array(a: MatrixLike) -> np.ndarray:
    if isinstance(a, DenseMatrix):
        return a.to_array()
    array = np.array(a, dtype=np.float64)
    if array.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError("matrix entries must be finite")
    return array


def symmetric_eigen(a: MatrixLike, max_sweeps: int = 60) -> Tuple[np.ndarray, np.ndarray]:
    """
    Eigen-decomposition of a symmetric matrix by cyclic Jacobi sweeps

    Args:
        a: square matrix, symmetric within 1e-12
        max_sweeps: sweep budget before giving up

    Returns:
        (eigenvalues ascending, eigenvectors as orthonormal columns)
    """
    A = _as_array(a)
    n, m = A.shape
    if n != m:
        raise ShapeError(f"symmetric_eigen needs a square matrix, got {A.shape}")
    asymmetry = np.max(np.abs(A - A.T)) if n else 0.0
    if asymmetry > 1e-12 * max(1.0, np.max(np.abs(A))):
        raise InvalidInputError(f"matrix is not symmetric (max |A - A^T| = {asymmetry:.3e})")

    A = 0.5 * (A + A.T)
    V = np.eye(n)
    scale = max(np.linalg.norm(A), np.finfo(float).tiny)

    for sweep in range(max_sweeps):
        # summed directly; ||A||^2 - ||diag||^2 stalls near sqrt(eps) * ||A||
        off = np.sqrt(2.0 * np.sum(np.triu(A, 1) ** 2))
        if off <= 1e-15 * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                row_p = A[p, :].copy()
                row_q = A[q, :].copy()
                A[p, :] = c * row_p - s * row_q
                A[q, :] = s * row_p + c * row_q
                col_p = A[:, p].copy()
                col_q = A[:, q].copy()
                A[:, p] = c * col_p - s * col_q
                A[:, q] = s * col_p + c * col_q
                A[p, q] = A[q, p] = 0.0

                vec_p = V[:, p].copy()
                vec_q = V[:, q].copy()
                V[:, p] = c * vec_p - s * vec_q
                V[:, q] = s * vec_p + c * vec_q
    else:
        raise NumericalError(f"Jacobi sweeps did not converge in {max_sweeps} sweeps")

    logger.debug("Jacobi converged on %dx%d matrix in %d sweeps", n, n, sweep)
    eigenvalues = np.diag(A).copy()
    order = np.argsort(eigenvalues, kind="stable")
    eigenvalues = eigenvalues[order]
    V = V[:, order]

    # sign convention: the largest-magnitude entry of each vector is positive
    for k in range(n):
        pivot = np.argmax(np.abs(V[:, k]))
        if V[pivot, k] < 0:
            V[:, k] = -V[:, k]
    return eigenvalues, V

"""Dense vectors, matrices and the linear solves used by every solver layer.

Vectors are 1-D and matrices 2-D float64 numpy arrays. The LU factorization
comes from scipy (partial pivoting); this module adds the deterministic
singularity cutoff and the bordered KKT assembly on top of it.
"""

import logging
import warnings
from typing import Optional, Tuple

import numpy as np
import numpy.typing as npt
from scipy import linalg

from app.core.errors import NonFiniteError, SingularMatrixError

logger = logging.getLogger(__name__)

Vector = npt.NDArray[np.float64]
Matrix = npt.NDArray[np.float64]

PIVOT_TOL = 1e-12
SYMMETRY_TOL = 1e-12


def as_vector(values, length: Optional[int] = None, name: str = "vector") -> Vector:
    """Coerce `values` to a finite 1-D float array, optionally checking its length."""
    vec = np.asarray(values, dtype=np.float64).reshape(-1)
    if not np.all(np.isfinite(vec)):
        raise NonFiniteError(f"{name} has non-finite entries")
    if length is not None and vec.shape[0] != length:
        raise ValueError(f"{name} has length {vec.shape[0]}, expected {length}")
    return vec


def as_matrix(values, cols: Optional[int] = None, name: str = "matrix") -> Matrix:
    """Coerce `values` to a finite 2-D float array.

    An empty input becomes a (0, cols) matrix so that "no rows" keeps its
    column count.
    """
    mat = np.asarray(values, dtype=np.float64)
    if mat.size == 0:
        return np.zeros((0, cols if cols is not None else (mat.shape[-1] if mat.ndim == 2 else 0)))
    if mat.ndim == 1:
        mat = mat.reshape(1, -1)
    if mat.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {mat.shape}")
    if cols is not None and mat.shape[1] != cols:
        raise ValueError(f"{name} has {mat.shape[1]} columns, expected {cols}")
    if not np.all(np.isfinite(mat)):
        raise NonFiniteError(f"{name} has non-finite entries")
    return mat


def is_symmetric(mat: Matrix, tol: float = SYMMETRY_TOL) -> bool:
    """Check |M_ij - M_ji| <= tol * max(1, |M_ij|) entrywise."""
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        return False
    scale = np.maximum(1.0, np.abs(mat))
    return bool(np.all(np.abs(mat - mat.T) <= tol * scale))


def lu_solve(A, b) -> Vector:
    """
    Solve A x = b by LU factorization with partial pivoting.

    Args:
        A: square n x n matrix
        b: right hand side of length n

    Returns:
        Solution vector x

    Raises:
        SingularMatrixError: a pivot's magnitude is below 1e-12 after row exchange
    """
    A = as_matrix(A, name="A")
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"lu_solve needs a square matrix, got {A.shape}")
    b = as_vector(b, length=n, name="b")
    if n == 0:
        return np.zeros(0)

    with warnings.catch_warnings():
        # Exactly singular factors only warn; the pivot check below decides.
        warnings.simplefilter("ignore", linalg.LinAlgWarning)
        lu, piv = linalg.lu_factor(A, check_finite=False)

    pivots = np.abs(np.diag(lu))
    smallest = int(np.argmin(pivots))
    if pivots[smallest] < PIVOT_TOL:
        raise SingularMatrixError(
            f"pivot {pivots[smallest]:.3e} at position {smallest} is below {PIVOT_TOL:g}"
        )

    x = linalg.lu_solve((lu, piv), b, check_finite=False)
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("lu_solve produced non-finite entries")
    return x


def solve_kkt(Q, A, r1, r2=None) -> Tuple[Vector, Vector]:
    """
    Solve the equality-constrained stationarity system

        [ Q  A^T ] [ x      ]   [ r1 ]
        [ A   0  ] [ lambda ] = [ r2 ]

    Args:
        Q: n x n symmetric matrix
        A: m x n constraint matrix (m may be 0)
        r1: length-n right hand side
        r2: length-m right hand side (zeros when omitted)

    Returns:
        Tuple (x, lambda)

    Raises:
        SingularMatrixError: A has dependent rows or Q is singular on the null space of A
    """
    Q = as_matrix(Q, name="Q")
    n = Q.shape[0]
    A = as_matrix(A, cols=n, name="A")
    m = A.shape[0]
    if m > n:
        raise SingularMatrixError(f"{m} constraint rows exceed {n} variables")
    r1 = as_vector(r1, length=n, name="r1")
    r2 = np.zeros(m) if r2 is None else as_vector(r2, length=m, name="r2")

    K = np.zeros((n + m, n + m))
    K[:n, :n] = Q
    K[:n, n:] = A.T
    K[n:, :n] = A
    sol = lu_solve(K, np.concatenate([r1, r2]))
    return sol[:n], sol[n:]


def independent_rows(A: Matrix, candidates, base: Optional[Matrix] = None,
                     tol: float = 1e-9) -> list:
    """Greedily pick rows of `A` (in candidate order) that keep `base` + picks independent."""
    cols = A.shape[1]
    chosen = []
    stack = np.zeros((0, cols)) if base is None else base
    rank = np.linalg.matrix_rank(stack, tol=tol) if stack.shape[0] else 0
    for i in candidates:
        trial = np.vstack([stack, A[i:i + 1]])
        trial_rank = np.linalg.matrix_rank(trial, tol=tol)
        if trial_rank > rank:
            chosen.append(i)
            stack = trial
            rank = trial_rank
    return chosen


def row_basis(A, tol: float = 1e-9) -> list:
    """
    Indices (ascending) of a maximal set of linearly independent rows of `A`.

    Uses QR with column pivoting on A^T; a pivot below `tol` times the
    largest one marks the remaining rows as dependent.
    """
    A = as_matrix(A, name="A")
    if A.shape[0] == 0:
        return []
    R, perm = linalg.qr(A.T, mode="r", pivoting=True)
    diag = np.abs(np.diag(R))
    if diag.size == 0 or diag[0] == 0.0:
        return []
    rank = int(np.count_nonzero(diag > tol * diag[0]))
    return sorted(int(i) for i in perm[:rank])

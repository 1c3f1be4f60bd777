"""Dense linear-algebra kernels shared by the rest of the package.

Contract-focused wrappers around LAPACK routines (via numpy/scipy): matrix
exponential, SVD-based numerical rank, minimum-norm least squares, and
eigenvalue summaries. Everything operates on plain float ndarrays; inputs
are validated once here so downstream modules can assume finite, correctly
shaped matrices.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "RANK_TOL",
    "SpectrumInfo",
    "UnreachableTargetError",
    "as_matrix",
    "mat_exp",
    "numerical_rank",
    "min_norm_solve",
    "spectrum",
    "symmetric_part_max_eig",
]

# Default relative singular-value threshold for rank decisions.
RANK_TOL = 1e-9


class UnreachableTargetError(ValueError):
    """Exact solve requested for a target outside the operator's range."""


def as_matrix(a, rows=None, cols=None):
    """Validate `a` and return it as a 2-D float array.

    Parameters
    ----------
    a : array_like
        Matrix entries, row-major.
    rows, cols : int, optional
        Expected dimensions; checked when given.

    Returns
    -------
    ndarray
        Float array of shape (rows, cols).

    Raises
    ------
    ValueError
        If the input is not 2-D, contains non-finite entries, or its shape
        disagrees with `rows`/`cols`.
    """
    m = np.asarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D array, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix entries must be finite")
    if rows is not None and m.shape[0] != rows:
        raise ValueError(f"expected {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise ValueError(f"expected {cols} columns, got {m.shape[1]}")
    return m


def mat_exp(M, t=1.0):
    """Matrix exponential exp(M*t).

    Uses scaling-and-squaring with a fixed-order rational (Pade) kernel.

    Parameters
    ----------
    M : array_like
        Square matrix.
    t : float
        Scalar time; may be negative.

    Returns
    -------
    ndarray
        exp(M*t), same shape as M.
    """
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("mat_exp requires a square matrix")
    t = float(t)
    if not math.isfinite(t):
        raise ValueError("time must be finite")
    return scipy.linalg.expm(M * t)


def numerical_rank(M, tol=RANK_TOL):
    """Number of singular values of M above ``tol * sigma_max``.

    The zero matrix has rank 0 at every tolerance.
    """
    M = as_matrix(M)
    if M.size == 0:
        return 0
    if tol <= 0.0:
        raise ValueError("tolerance must be positive")
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def min_norm_solve(A, b, require_exact=False, tol=RANK_TOL):
    """Minimum-norm least-squares solution of ``A x = b``.

    Among all minimizers of ``||A x - b||`` the returned `x` has the
    smallest Euclidean norm; it is orthogonal to the (numerical) null
    space of A. Singular values below ``tol * sigma_max`` are treated
    as zero, matching `numerical_rank`.

    Parameters
    ----------
    A : array_like, shape (p, q)
    b : array_like, shape (p,)
    require_exact : bool
        When True, demand ``||A x - b|| <= tol * ||b||`` and raise
        `UnreachableTargetError` otherwise.
    tol : float
        Relative cutoff, shared by the solve and the exactness check.

    Returns
    -------
    ndarray, shape (q,)
    """
    A = as_matrix(A)
    b = np.asarray(b, dtype=float).reshape(-1)
    if not np.all(np.isfinite(b)):
        raise ValueError("right-hand side must be finite")
    if b.shape[0] != A.shape[0]:
        raise ValueError(f"shape mismatch: A has {A.shape[0]} rows, b has {b.shape[0]}")
    x, _, _, _ = np.linalg.lstsq(A, b, rcond=tol)
    if require_exact:
        residual = float(np.linalg.norm(A @ x - b))
        bound = tol * float(np.linalg.norm(b))
        if residual > bound:
            raise UnreachableTargetError(
                f"target unreachable: residual {residual:.3e} exceeds {bound:.3e}"
            )
    return x


@dataclass(frozen=True)
class SpectrumInfo:
    """Eigenvalue summary of a real square matrix.

    Attributes
    ----------
    eigenvalues : ndarray
        Complex eigenvalues (conjugate pairs for real input).
    max_real_part : float
        max Re(lambda).
    min_nonzero_abs_imag : float
        min |Im(lambda)| over eigenvalues with nonzero imaginary part;
        +inf when the spectrum is entirely real.
    """

    eigenvalues: np.ndarray
    max_real_part: float
    min_nonzero_abs_imag: float


def spectrum(M):
    """Eigenvalues of M with the summary fields used by schedule selection."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("spectrum requires a square matrix")
    w = np.linalg.eigvals(M)
    imag = np.abs(w.imag)
    nonzero = imag[imag > 0.0]
    min_imag = float(nonzero.min()) if nonzero.size else math.inf
    return SpectrumInfo(
        eigenvalues=w,
        max_real_part=float(w.real.max()),
        min_nonzero_abs_imag=min_imag,
    )


def symmetric_part_max_eig(M):
    """Largest eigenvalue of (M + M^T)/2, the dissipativity functional."""
    M = as_matrix(M)
    if M.shape[0] != M.shape[1]:
        raise ValueError("symmetric_part_max_eig requires a square matrix")
    sym = 0.5 * (M + M.T)
    return float(np.linalg.eigvalsh(sym)[-1])

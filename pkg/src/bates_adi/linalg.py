"""Banded LU kernels for the implicit ADI stages and a dense eigensolver.

The implicit stage matrices I - theta*dt*A_j are time independent, so they
are factored once up front and the factors are reused for every solve in
the time loop. Factorization and solves delegate to LAPACK's banded
routines (gbtrf/gbtrs, partial pivoting within the band); the eigensolver
delegates to LAPACK's Hessenberg-QR through scipy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.linalg import LinAlgError, eigvals, get_lapack_funcs


class SingularMatrixError(ValueError):
    """Raised when banded factorization hits an exactly zero pivot."""

    def __init__(self, pivot_index: int):
        self.pivot_index = pivot_index
        super().__init__(f"exactly singular matrix: zero pivot at index {pivot_index}")


class EigenSolveError(RuntimeError):
    """Raised when the QR eigenvalue iteration fails to converge."""


@dataclass(frozen=True)
class BandedLU:
    """LU factors of a banded matrix in LAPACK band storage.

    ``band`` has shape (2*kl + ku + 1, n): the declared band plus kl rows
    of pivoting fill. Factors are immutable; concurrent solves are safe.
    """

    band: np.ndarray
    ipiv: np.ndarray
    kl: int
    ku: int
    n: int


def _extract_band(matrix, kl: int, ku: int) -> tuple[np.ndarray, int]:
    """Pack the diagonals of ``matrix`` into LAPACK gbtrf storage."""
    if sparse.issparse(matrix):
        n, n2 = matrix.shape
        diag = matrix.diagonal
        total = np.abs(matrix).sum()
    else:
        matrix = np.asarray(matrix)
        if matrix.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        n, n2 = matrix.shape
        diag = lambda k: np.diagonal(matrix, k)  # noqa: E731
        total = np.abs(matrix).sum()
    if n != n2:
        raise ValueError(f"matrix must be square, got shape {(n, n2)}")
    if kl < 0 or ku < 0 or kl >= n or ku >= n:
        raise ValueError(f"invalid bandwidths ({kl}, {ku}) for size {n}")

    ab = np.zeros((2 * kl + ku + 1, n))
    band_total = 0.0
    for k in range(-kl, ku + 1):
        d = np.asarray(diag(k), dtype=float)
        band_total += np.abs(d).sum()
        if k >= 0:
            ab[kl + ku - k, k:] = d
        else:
            ab[kl + ku - k, : n + k] = d
    if not np.isclose(band_total, total, rtol=0.0, atol=1e-12 * max(total, 1.0)):
        raise ValueError("matrix has entries outside the declared band")
    return ab, n


def factor_banded(matrix, lower_bw: int, upper_bw: int) -> BandedLU:
    """Factor a square banded matrix with partial pivoting.

    Subsequent solves cost O(bandwidth^2 * n). Raises
    :class:`SingularMatrixError` with the (1-based) pivot index when the
    matrix is exactly singular.
    """
    ab, n = _extract_band(matrix, lower_bw, upper_bw)
    (gbtrf,) = get_lapack_funcs(("gbtrf",), (ab,))
    lu, ipiv, info = gbtrf(ab, lower_bw, upper_bw)
    if info < 0:
        raise ValueError(f"illegal argument {-info} passed to gbtrf")
    if info > 0:
        raise SingularMatrixError(pivot_index=int(info))
    return BandedLU(band=lu, ipiv=ipiv, kl=lower_bw, ku=upper_bw, n=n)


def solve_banded(lu: BandedLU, rhs: np.ndarray) -> np.ndarray:
    """Solve M x = rhs reusing the banded factorization of M."""
    rhs = np.asarray(rhs)
    if rhs.shape != (lu.n,):
        raise ValueError(f"rhs must have shape ({lu.n},), got {rhs.shape}")
    (gbtrs,) = get_lapack_funcs(("gbtrs",), (lu.band, rhs))
    x, info = gbtrs(lu.band, lu.kl, lu.ku, rhs, lu.ipiv)
    if info != 0:
        raise ValueError(f"gbtrs failed with info={info}")
    return x


@dataclass(frozen=True)
class SpectrumResult:
    """Eigenvalues of a real dense matrix (complex, conjugate-closed)."""

    values: np.ndarray

    def __len__(self) -> int:
        return len(self.values)


MAX_EIG_DIM = 5000


def dense_eigenvalues(matrix: np.ndarray) -> SpectrumResult:
    """All eigenvalues of a dense real square matrix."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"matrix must be square, got shape {matrix.shape}")
    if matrix.shape[0] > MAX_EIG_DIM:
        raise ValueError(f"matrix dimension {matrix.shape[0]} exceeds {MAX_EIG_DIM}")
    try:
        values = eigvals(matrix)
    except LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
        raise EigenSolveError(f"QR iteration did not converge: {exc}") from exc
    return SpectrumResult(values=np.asarray(values, dtype=complex))

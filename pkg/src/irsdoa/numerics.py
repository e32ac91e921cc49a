"""Dense complex-Hermitian matrix primitives shared by all estimator code.

Matrices are plain 2-D ``numpy.ndarray`` of ``complex128``.  Everything here
is a pure function; inputs are never modified in place.
"""

import numpy as np
from dataclasses import dataclass


class DimensionError(ValueError):
    """Matrix dimensions are inconsistent with the operation."""


class NumericError(ArithmeticError):
    """Non-finite values or a numerically invalid input."""


class SingularMatrixError(NumericError):
    """A linear system or inversion met a numerically singular matrix."""


def as_matrix(a, name="matrix"):
    """Validate and return `a` as a finite 2-D complex128 array."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {a.shape}")
    if a.size == 0:
        raise DimensionError(f"{name} must be non-empty, got shape {a.shape}")
    a = a.astype(np.complex128, copy=False)
    if not np.all(np.isfinite(a)):
        raise NumericError(f"{name} contains non-finite entries")
    return a


def hermitize(a):
    """Return (A + A^H) / 2, removing roundoff asymmetry from products."""
    return 0.5 * (a + a.conj().T)


@dataclass(frozen=True)
class HermitianEig:
    """Eigendecomposition A = V diag(w) V^H with `eigenvalues` ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _square_hermitian(a, name):
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")
    return hermitize(a)


def hermitian_eig(a):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input is symmetrized as (A + A^H)/2 before factorization, so mild
    asymmetry from accumulated roundoff is tolerated.
    """
    h = _square_hermitian(a, "hermitian_eig input")
    w, v = np.linalg.eigh(h)
    return HermitianEig(eigenvalues=w, eigenvectors=v)


def psd_project(a):
    """Frobenius-nearest positive-semidefinite matrix to Hermitian `a`.

    Clamps negative eigenvalues to zero and reconstructs; the result is
    Hermitian PSD.
    """
    eig = hermitian_eig(a)
    w = np.maximum(eig.eigenvalues, 0.0)
    v = eig.eigenvectors
    return hermitize((v * w) @ v.conj().T)


def hermitian_solve(a, b):
    """Solve A X = B for Hermitian positive-definite A.

    A nearly singular A is regularized by adding eps*I with
    eps = 1e-10 * trace(A)/n whenever the smallest eigenvalue falls below
    1e-12 * trace(A)/n.  If A is singular beyond that, raises
    :class:`SingularMatrixError` naming the smallest eigenvalue.
    """
    h = _square_hermitian(a, "hermitian_solve A")
    b = as_matrix(b, "hermitian_solve B")
    n = h.shape[0]
    if b.shape[0] != n:
        raise DimensionError(
            f"B has {b.shape[0]} rows, expected {n} to match A"
        )
    w, v = np.linalg.eigh(h)
    mean_diag = float(np.trace(h).real) / n
    if w[0] < 1e-12 * mean_diag:
        w = w + 1e-10 * mean_diag
    if w[0] <= 0.0:
        raise SingularMatrixError(
            f"matrix is numerically singular (smallest eigenvalue {w[0]:.3e})"
        )
    return v @ ((v.conj().T @ b) / w[:, None])

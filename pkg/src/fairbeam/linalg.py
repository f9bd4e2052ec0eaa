"""Small complex dense linear-algebra kernel.

Everything here operates on plain numpy arrays (complex128). The matrices
involved are tiny (at most the RF-chain count per side), so LAPACK through
numpy is used directly; the value added by this module is the shape/domain
checking and the conditioning guard on inversion.
"""

import numpy as np

from .errors import DimensionError, SingularMatrixError

# Inverses are rejected above this 1-norm condition estimate. Regularized
# identity-plus-PSD matrices stay far below it.
COND_LIMIT = 1e12


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2:
        raise DimensionError(f"expected a 2-D matrix, got ndim={m.ndim}")
    return m


def _as_vector(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got ndim={v.ndim}")
    return v


def hermitian(m) -> np.ndarray:
    """Conjugate transpose."""
    return _as_matrix(m).conj().T


def matmul(a, b) -> np.ndarray:
    """Complex matrix product with an explicit shape check."""
    a, b = _as_matrix(a), _as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def inverse(m) -> np.ndarray:
    """Inverse of a small square matrix.

    Raises SingularMatrixError when the matrix is singular or its 1-norm
    condition estimate exceeds COND_LIMIT; accepted inputs satisfy
    ``norm(m @ inverse(m) - I) / norm(I) < 1e-10``.
    """
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise DimensionError(f"matrix is not square: {m.shape}")
    try:
        inv = np.linalg.inv(m)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(str(exc)) from exc
    cond = np.linalg.norm(m, 1) * np.linalg.norm(inv, 1)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularMatrixError(f"condition estimate {cond:.3e} exceeds {COND_LIMIT:.0e}")
    return inv


def kronecker(a, b) -> np.ndarray:
    """Kronecker product of two vectors: out[i*len(b)+j] = a[i]*b[j]."""
    return np.kron(_as_vector(a), _as_vector(b))

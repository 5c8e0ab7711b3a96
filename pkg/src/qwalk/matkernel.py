"""Small dense complex linear algebra for 2x2 and 4x4 matrices.

Matrices are plain ``numpy`` arrays of dtype complex128. ``vec`` stacks rows
(row-major), so ``kron(A, B.conj()) @ vec(X) == vec(A @ X @ B^*)``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import EigenConvergenceError, NotHermitian, ValidationError

HERMITIAN_TOL = 1e-12


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    return m


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(a)).T


def vec(a: np.ndarray) -> np.ndarray:
    """Row-major flattening of a square matrix."""
    return as_matrix(a).reshape(-1)


def unvec(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    d = int(round(np.sqrt(v.size)))
    if d * d != v.size:
        raise ValidationError(f"length {v.size} is not a perfect square")
    return v.reshape(d, d)


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(as_matrix(a), as_matrix(b))


def conjugation_matrix(b: np.ndarray) -> np.ndarray:
    """Matrix of X -> B X B^* acting on row-major vec."""
    b = as_matrix(b)
    return np.kron(b, b.conj())


def channel_matrix(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """Sum of B_i (x) conj(B_i) over a Kraus family."""
    kraus = [as_matrix(b) for b in kraus]
    if not kraus:
        raise ValidationError("channel_matrix needs at least one Kraus matrix")
    d = kraus[0].shape[0]
    if any(b.shape != (d, d) for b in kraus):
        raise ValidationError("Kraus matrices must share one dimension")
    out = np.zeros((d * d, d * d), dtype=complex)
    for b in kraus:
        out += np.kron(b, b.conj())
    return out


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    return bool(np.max(np.abs(a - adjoint(a)), initial=0.0) <= tol)


def is_normal(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(a)
    ah = adjoint(a)
    return bool(np.max(np.abs(a @ ah - ah @ a), initial=0.0) <= tol)


def hermitian_eigenvalues(a: np.ndarray) -> tuple[float, float]:
    """Closed-form eigenvalues of a 2x2 Hermitian matrix, largest first."""
    a = as_matrix(a)
    if a.shape != (2, 2):
        raise ValidationError("hermitian_eigenvalues is defined for 2x2 input")
    if not is_hermitian(a):
        raise NotHermitian("matrix is not Hermitian within 1e-12")
    p, q = a[0, 0].real, a[1, 1].real
    mean = 0.5 * (p + q)
    radius = float(np.hypot(0.5 * (p - q), abs(a[0, 1])))
    return mean + radius, mean - radius


def singular_values(a: np.ndarray) -> tuple[float, float]:
    a = as_matrix(a)
    gram = adjoint(a) @ a
    # enforce exact Hermitian symmetry before the closed form
    gram = 0.5 * (gram + adjoint(gram))
    hi, lo = hermitian_eigenvalues(gram)
    return float(np.sqrt(max(hi, 0.0))), float(np.sqrt(max(lo, 0.0)))


def eigenvalues_4x4(m: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    """Eigenvalues of a general complex 4x4 matrix, with multiplicity.

    Each eigenvalue is checked against ``|det(M - lambda I)| < rtol * ||M||``.
    """
    m = as_matrix(m)
    if m.shape != (4, 4):
        raise ValidationError("eigenvalues_4x4 expects a 4x4 matrix")
    try:
        lam = np.linalg.eigvals(m)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(f"eigenvalue iteration failed: {exc}") from exc
    scale = max(np.linalg.norm(m, 2), 1.0)
    eye = np.eye(4)
    residual = max(abs(np.linalg.det(m - x * eye)) for x in lam)
    if residual >= rtol * scale:
        raise EigenConvergenceError(
            f"eigenvalue residual {residual:.3e} exceeds {rtol * scale:.3e}"
        )
    return lam

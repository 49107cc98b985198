"""Dense complex linear algebra helpers sized for 2^N x 2^N operators, N <= 8."""

from __future__ import annotations

import numpy as np

__all__ = [
    "NotHermitian",
    "NotPSD",
    "NotUnitary",
    "DimensionMismatch",
    "RankDeficient",
    "HermitianEigenSystem",
    "kron",
    "kron_all",
    "is_hermitian",
    "is_unitary",
    "eig_hermitian",
    "sqrt_psd",
    "singular_values",
    "rank_tol",
]

HERMITIAN_TOL = 1e-10
PSD_CLAMP = 1e-8
RANK_TOL = 1e-8


class NotHermitian(ValueError):
    pass


class NotPSD(ValueError):
    pass


class NotUnitary(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class RankDeficient(ValueError):
    pass


class HermitianEigenSystem:
    """Eigenvalues in ascending order with eigenvectors as columns."""

    __slots__ = ("eigenvalues", "eigenvectors")

    def __init__(self, eigenvalues: np.ndarray, eigenvectors: np.ndarray):
        self.eigenvalues = eigenvalues
        self.eigenvectors = eigenvectors

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def __iter__(self):
        yield self.eigenvalues
        yield self.eigenvectors


def _as_matrix(m) -> np.ndarray:
    a = np.asarray(m)
    if a.ndim != 2 or 0 in a.shape:
        raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def kron(a, b) -> np.ndarray:
    return np.kron(_as_matrix(a), _as_matrix(b))


def kron_all(mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def hermitian_residual(h: np.ndarray) -> float:
    """Largest absolute entry of h - h^dagger, scaled by max(1, |h|_max)."""
    scale = max(1.0, float(np.max(np.abs(h))))
    return float(np.max(np.abs(h - h.conj().T))) / scale


def is_hermitian(h, tol: float = HERMITIAN_TOL) -> bool:
    h = _as_matrix(h)
    return h.shape[0] == h.shape[1] and hermitian_residual(h) <= tol


def is_unitary(u, tol: float = HERMITIAN_TOL) -> bool:
    u = _as_matrix(u)
    if u.shape[0] != u.shape[1]:
        return False
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def eig_hermitian(h, tol: float = HERMITIAN_TOL) -> HermitianEigenSystem:
    h = _as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got {h.shape}")
    if hermitian_residual(h) > tol:
        raise NotHermitian(f"symmetry residual {hermitian_residual(h):.3g} exceeds {tol:g}")
    # symmetrize so LAPACK sees exactly Hermitian input
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return HermitianEigenSystem(w, v)


def sqrt_psd(h, clamp: float = PSD_CLAMP) -> np.ndarray:
    """Principal square root of a positive semidefinite Hermitian matrix.

    Eigenvalues in ``[-clamp, 0)`` are treated as exact zeros; anything more
    negative raises :class:`NotPSD`.
    """
    w, v = eig_hermitian(h)
    if w[0] < -clamp:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3g} is below -{clamp:g}")
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def singular_values(m) -> np.ndarray:
    return np.linalg.svd(_as_matrix(m), compute_uv=False)


def rank_tol(m, tol: float = RANK_TOL) -> int:
    """Numerical rank: singular values above ``tol * sigma_max``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))

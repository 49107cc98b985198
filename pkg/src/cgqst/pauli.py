"""Normalized Pauli-product operator basis and coefficient transforms.

Basis element ``i`` is the tensor product of single-qubit factors
``{I, X, Y, Z} / sqrt(2)`` so that ``Tr(G_i G_j) = delta_ij``.  Elements are
ordered lexicographically by label (``I < X < Y < Z``) with qubit 0 as the
leftmost character and the most significant tensor factor.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from .linalg import DimensionMismatch, NotHermitian, hermitian_residual

MAX_QUBITS = 8
LETTERS = "IXYZ"

PAULI = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# _FWD[a, 2r + c] = P_a[c, r] / sqrt2, so contracting op[r, c] gives Tr(op P_a) / sqrt2
_FWD = (PAULI.transpose(0, 2, 1) / np.sqrt(2)).reshape(4, 4)
# _INV[a, 2r + c] = P_a[r, c] / sqrt2
_INV = (PAULI / np.sqrt(2)).reshape(4, 4)


class OperatorBasis:
    """Orthonormal Hermitian basis for ``n_qubits`` qubits.

    Only labels are stored eagerly; matrices are built on request because the
    full basis for 8 qubits would not fit in memory.
    """

    def __init__(self, n_qubits: int):
        if not 1 <= n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
        self.n_qubits = n_qubits
        self.dim = 2**n_qubits
        self.labels = tuple("".join(p) for p in itertools.product(LETTERS, repeat=n_qubits))
        self._index = {lab: i for i, lab in enumerate(self.labels)}
        self._elements = None

    def __len__(self) -> int:
        return len(self.labels)

    def __repr__(self) -> str:
        return f"OperatorBasis(n_qubits={self.n_qubits})"

    def index(self, label: str) -> int:
        return self._index[label]

    def element(self, i) -> np.ndarray:
        """Matrix of basis element ``i`` (an index or a Pauli label)."""
        label = self.labels[i] if not isinstance(i, str) else i
        out = np.ones((1, 1), dtype=complex)
        for ch in label:
            out = np.kron(out, PAULI[LETTERS.index(ch)] / np.sqrt(2))
        return out

    @property
    def elements(self) -> np.ndarray:
        if self._elements is None:
            self._elements = np.array([self.element(i) for i in range(len(self))])
        return self._elements

    def decompose(self, op) -> np.ndarray:
        return decompose(op, self)

    def reconstruct(self, v) -> np.ndarray:
        return reconstruct(v, self)


@lru_cache(maxsize=None)
def build_basis(n_qubits: int) -> OperatorBasis:
    return OperatorBasis(n_qubits)


def _decompose_raw(ops: np.ndarray, n: int) -> np.ndarray:
    """Complex coefficients Tr(op G_i) for a batch of operators, shape (B, 4^n)."""
    b = ops.shape[0]
    t = ops.reshape((b,) + (2,) * (2 * n))
    # interleave (r_q, c_q) for each qubit
    order = [0] + [ax for q in range(n) for ax in (1 + q, 1 + n + q)]
    t = t.transpose(order).reshape((b,) + (4,) * n)
    for _ in range(n):
        t = np.tensordot(t, _FWD, axes=([1], [1]))
    return t.reshape(b, -1)


def decompose_many(ops, basis: OperatorBasis, check: bool = True) -> np.ndarray:
    """Row-wise coefficients of a stack of Hermitian operators, shape (B, 4^N)."""
    ops = np.asarray(ops, dtype=complex)
    if ops.ndim != 3 or ops.shape[1:] != (basis.dim, basis.dim):
        raise DimensionMismatch(
            f"expected operators of shape (*, {basis.dim}, {basis.dim}), got {ops.shape}"
        )
    coeffs = _decompose_raw(ops, basis.n_qubits)
    if check:
        for op in ops:
            if hermitian_residual(op) > 1e-10:
                raise NotHermitian("operator is not Hermitian")
    return coeffs.real.copy()


def decompose(op, basis: OperatorBasis) -> np.ndarray:
    op = np.asarray(op, dtype=complex)
    if op.shape != (basis.dim, basis.dim):
        raise DimensionMismatch(f"operator shape {op.shape} does not match basis dim {basis.dim}")
    return decompose_many(op[None], basis)[0]


def reconstruct(v, basis: OperatorBasis) -> np.ndarray:
    v = np.asarray(v)
    n = basis.n_qubits
    if v.shape != (len(basis),):
        raise DimensionMismatch(f"coefficient vector length {v.shape} != {len(basis)}")
    t = v.astype(complex).reshape((4,) * n)
    for _ in range(n):
        t = np.tensordot(t, _INV, axes=([0], [0]))
    # axes are now (r0 c0, r1 c1, ...); split and regroup rows then columns
    t = t.reshape((2,) * (2 * n))
    order = [2 * q for q in range(n)] + [2 * q + 1 for q in range(n)]
    return t.transpose(order).reshape(basis.dim, basis.dim)

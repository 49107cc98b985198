"""Coarse-grained measurement operator and the POVM sets built from it.

Every element is ``Omega = G^dagger M_CG G`` for a circuit unitary ``G``; the
binary complement ``I - Omega`` carries no independent information and is
left implicit.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .circuit import CircuitLayout, circuit_unitaries
from .linalg import DimensionMismatch, NotUnitary, RankDeficient, is_unitary, rank_tol
from .pauli import MAX_QUBITS, OperatorBasis, build_basis, decompose_many

COVERAGE_TOL = 1e-6


def m_cg(n_qubits: int) -> np.ndarray:
    """Diagonal CG operator: entry for bitstring b is (number of 0 bits in b) / N."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    idx = np.arange(2**n_qubits)
    ones = np.zeros_like(idx)
    for q in range(n_qubits):
        ones += (idx >> q) & 1
    return np.diag((n_qubits - ones) / n_qubits).astype(complex)


def conjugate(m: np.ndarray, g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=complex)
    if g.shape != m.shape:
        raise DimensionMismatch(f"unitary shape {g.shape} does not match operator {m.shape}")
    if not is_unitary(g):
        raise NotUnitary("generator is not unitary within 1e-10")
    return g.conj().T @ m @ g


def conjugate_many(m: np.ndarray, gs: np.ndarray) -> np.ndarray:
    """``G^dagger M G`` for a stack of unitaries, without the unitarity check."""
    return np.einsum("bji,jk,bkl->bil", gs.conj(), m, gs)


@dataclass
class PovmElement:
    """One CG-POVM element; ``layout``/``params`` are absent for sets not made by a circuit."""

    operator: np.ndarray
    layout: Optional[CircuitLayout] = None
    params: Optional[np.ndarray] = None


@dataclass
class PovmSet:
    n_qubits: int
    elements: list[PovmElement] = field(default_factory=list)
    label: str = ""

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def operators(self) -> np.ndarray:
        dim = 2**self.n_qubits
        if not self.elements:
            return np.zeros((0, dim, dim), dtype=complex)
        return np.array([e.operator for e in self.elements])

    @classmethod
    def from_circuits(cls, layouts: Sequence[CircuitLayout], params: Sequence, label: str = "") -> "PovmSet":
        """Build elements from per-element layouts and parameter vectors.

        Elements sharing a layout are evaluated as one batch.
        """
        if len(layouts) != len(params):
            raise ValueError("need one parameter vector per layout")
        if not layouts:
            raise ValueError("empty construction")
        n = layouts[0].n_qubits
        m = m_cg(n)
        ops: list = [None] * len(layouts)
        groups: dict = {}
        for k, lay in enumerate(layouts):
            if lay.n_qubits != n:
                raise DimensionMismatch("all layouts must act on the same register")
            groups.setdefault(lay, []).append(k)
        for lay, ks in groups.items():
            p = np.array([np.asarray(params[k], float) for k in ks])
            for k, om in zip(ks, conjugate_many(m, circuit_unitaries(lay, p))):
                ops[k] = om
        elements = [
            PovmElement(ops[k], layouts[k], np.array(params[k], dtype=float)) for k in range(len(layouts))
        ]
        return cls(n, elements, label)

    @classmethod
    def from_operators(cls, operators, label: str = "") -> "PovmSet":
        ops = np.asarray(operators, dtype=complex)
        n = int(round(np.log2(ops.shape[1])))
        return cls(n, [PovmElement(o) for o in ops], label)


def coefficient_matrix(povm: PovmSet, basis: Optional[OperatorBasis] = None) -> np.ndarray:
    """The real n x 4^N matrix with row k equal to the Pauli coefficients of Omega^k."""
    basis = basis or build_basis(povm.n_qubits)
    if basis.n_qubits != povm.n_qubits:
        raise DimensionMismatch("basis and POVM set act on different registers")
    if len(povm) == 0:
        return np.zeros((0, len(basis)))
    return decompose_many(povm.operators, basis)


def gram(povm: PovmSet) -> np.ndarray:
    """Pairwise Hilbert-Schmidt overlaps ``Tr(Omega^i Omega^j)``."""
    if len(povm) == 0:
        raise ValueError("Gram matrix of an empty set is undefined")
    return gram_from_operators(povm.operators)


def gram_from_operators(ops: np.ndarray) -> np.ndarray:
    v = ops.reshape(ops.shape[0], -1)
    # Omega Hermitian, so Tr(A B) = sum(conj(A) * B)
    g = (v.conj() @ v.T).real
    return 0.5 * (g + g.T)


def spectrum_entropy(eigenvalues) -> float:
    """Von Neumann entropy of a PSD spectrum after normalizing it to unit sum."""
    e = np.clip(np.asarray(eigenvalues, float), 0.0, None)
    total = e.sum()
    if total <= 0:
        raise ValueError("spectrum has zero trace")
    p = e / total
    p = p[p > 0]
    return float(-(p * np.log(p)).sum())


def gram_spectrum(g: np.ndarray) -> np.ndarray:
    return np.linalg.eigvalsh(g)


def entropy(g: np.ndarray) -> float:
    """Entropy S of the normalized Gram spectrum, ``0 <= S <= ln n``."""
    return spectrum_entropy(gram_spectrum(np.asarray(g, float)))


def error_magnitude(x: np.ndarray, tol: float = 1e-8) -> float:
    """Sum of inverse squared singular values of X (unit homogeneous noise)."""
    x = np.asarray(x, float)
    s = np.linalg.svd(x, compute_uv=False)
    if s.size < x.shape[1] or rank_tol(x, tol) < x.shape[1]:
        raise RankDeficient(f"coefficient matrix has rank {rank_tol(x, tol)} < {x.shape[1]}")
    return float(np.sum(s[: x.shape[1]] ** -2.0))


def pauli_coverage(
    povm: PovmSet, basis: Optional[OperatorBasis] = None, tol: float = COVERAGE_TOL
) -> np.ndarray:
    if tol <= 0:
        raise ValueError("tol must be positive")
    basis = basis or build_basis(povm.n_qubits)
    if len(povm) == 0:
        return np.zeros(len(basis), dtype=bool)
    return coverage_of(coefficient_matrix(povm, basis), tol)


def coverage_of(x: np.ndarray, tol: float = COVERAGE_TOL) -> np.ndarray:
    return (np.abs(x) > tol).any(axis=0)


def offdiag_variance(g: np.ndarray) -> float:
    """Sample variance of off-diagonal Gram entries; zero for an exactly symmetric set."""
    n = g.shape[0]
    if n < 2:
        return 0.0
    off = g[~np.eye(n, dtype=bool)]
    return float(np.var(off, ddof=1)) if off.size > 1 else 0.0


def validate(povm: PovmSet, tol: float = 1e-10) -> dict:
    """Check element-wise POVM validity and return a summary dict."""
    ref = np.sort(np.diag(m_cg(povm.n_qubits)).real)
    problems = []
    for k, el in enumerate(povm.elements):
        op = el.operator
        if np.max(np.abs(op - op.conj().T)) > tol:
            problems.append(f"element {k}: not Hermitian")
            continue
        w = np.linalg.eigvalsh(op)
        if w[0] < -tol or w[-1] > 1 + tol:
            problems.append(f"element {k}: eigenvalues outside [0, 1]")
        if el.layout is not None and np.max(np.abs(w - ref)) > 1e-8:
            problems.append(f"element {k}: spectrum differs from M_CG")
    x = coefficient_matrix(povm)
    full = 4**povm.n_qubits
    g = gram(povm) if len(povm) else np.zeros((0, 0))
    return {
        "n_qubits": povm.n_qubits,
        "n_elements": len(povm),
        "rank": rank_tol(x) if len(povm) else 0,
        "full_rank": full,
        "entropy": entropy(g) if len(povm) else 0.0,
        "problems": problems,
        "valid": not problems,
    }


# -- serialization -----------------------------------------------------------

def _complex_to_list(m: np.ndarray) -> dict:
    return {"real": m.real.tolist(), "imag": m.imag.tolist()}


def povm_to_dict(povm: PovmSet, config: Optional[dict] = None) -> dict:
    basis = build_basis(povm.n_qubits)
    x = coefficient_matrix(povm, basis)
    g = gram(povm)
    eig = gram_spectrum(g)
    out = {
        "label": povm.label,
        "n_qubits": povm.n_qubits,
        "elements": [],
        "pauli_labels": list(basis.labels),
        "coefficients": x.tolist(),
        "gram_spectrum": eig[::-1].tolist(),
        "entropy": entropy(g),
        "rank": rank_tol(x),
    }
    for el in povm.elements:
        item = {}
        if el.layout is not None:
            item["layout"] = el.layout.to_dict()
            item["params"] = el.params.tolist()
        else:
            item["operator"] = _complex_to_list(el.operator)
        out["elements"].append(item)
    if config is not None:
        out["config"] = config
    return out


def povm_from_dict(data: dict) -> PovmSet:
    els = data["elements"]
    if all("layout" in e for e in els):
        layouts = [CircuitLayout.from_dict(e["layout"]) for e in els]
        params = [np.array(e["params"], float) for e in els]
        return PovmSet.from_circuits(layouts, params, label=data.get("label", ""))
    ops = [np.array(e["operator"]["real"]) + 1j * np.array(e["operator"]["imag"]) for e in els]
    return PovmSet.from_operators(ops, label=data.get("label", ""))


def dump_povm(povm: PovmSet, config: Optional[dict] = None) -> str:
    return json.dumps(povm_to_dict(povm, config), indent=1, sort_keys=True)


def load_povm(text: str) -> PovmSet:
    return povm_from_dict(json.loads(text))


def coefficient_csv(povm: PovmSet) -> str:
    basis = build_basis(povm.n_qubits)
    x = coefficient_matrix(povm, basis)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", *basis.labels])
    for k, row in enumerate(x):
        w.writerow([k, *(format(v, ".17g") for v in row)])
    return buf.getvalue()

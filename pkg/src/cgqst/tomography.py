"""Shot-noise simulation, linear-inversion reconstruction and fidelity studies."""

from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .linalg import DimensionMismatch, RankDeficient, rank_tol, sqrt_psd
from .pauli import OperatorBasis, build_basis, reconstruct
from .povm import PovmSet, coefficient_matrix, entropy, gram

_S2 = 1 / np.sqrt(2)
SINGLE_QUBIT_STATES = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([_S2, _S2], dtype=complex),
    "-": np.array([_S2, -_S2], dtype=complex),
    "i": np.array([_S2, 1j * _S2], dtype=complex),
    "-i": np.array([_S2, -1j * _S2], dtype=complex),
}


@dataclass
class TargetState:
    rho: np.ndarray
    label: str = ""

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionMismatch("density matrix must be square")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1) > 1e-10:
            raise ValueError("density matrix trace differs from 1")
        if np.linalg.eigvalsh(rho)[0] < -1e-10:
            raise ValueError("density matrix is not positive semidefinite")
        self.rho = rho

    @classmethod
    def from_product(cls, labels: Sequence[str]) -> "TargetState":
        psi = np.ones(1, dtype=complex)
        for lab in labels:
            psi = np.kron(psi, SINGLE_QUBIT_STATES[lab])
        return cls(np.outer(psi, psi.conj()), "_".join(labels))


def expectation(rho, omega) -> float:
    rho = rho.rho if isinstance(rho, TargetState) else np.asarray(rho)
    omega = np.asarray(omega)
    if rho.shape != omega.shape:
        raise DimensionMismatch(f"state {rho.shape} and operator {omega.shape} differ in size")
    return float(np.real(np.sum(rho.T * omega)))


def simulate_counts(p, shots: int, rng: np.random.Generator):
    """Poisson photon counts with mean ``shots * p``."""
    p = np.asarray(p, float)
    if np.any(p < 0):
        raise ValueError("probabilities must be non-negative")
    return rng.poisson(shots * p)


def linear_invert(x, p_hat) -> np.ndarray:
    """Least-squares coefficients solving ``X theta = p_hat``."""
    x = np.asarray(x, float)
    if rank_tol(x) < x.shape[1]:
        raise RankDeficient(f"coefficient matrix rank {rank_tol(x)} < {x.shape[1]}")
    return np.linalg.pinv(x) @ np.asarray(p_hat, float)


def project_simplex(values) -> np.ndarray:
    """Euclidean projection of a real vector onto the probability simplex."""
    v = np.asarray(values, float)
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    cond = u - css / k > 0
    r = k[cond][-1]
    tau = css[r - 1] / r
    return np.maximum(v - tau, 0.0)


def _project_simplex_rows(w: np.ndarray) -> np.ndarray:
    u = -np.sort(-w, axis=-1)
    css = np.cumsum(u, axis=-1) - 1.0
    k = np.arange(1, w.shape[-1] + 1)
    cond = u - css / k > 0
    r = w.shape[-1] - np.argmax(cond[..., ::-1], axis=-1)
    tau = np.take_along_axis(css, (r - 1)[..., None], axis=-1) / r[..., None]
    return np.maximum(w - tau, 0.0)


def project_matrices(mats: np.ndarray) -> np.ndarray:
    """Closest unit-trace PSD matrices (Frobenius) to a stack of matrices."""
    h = 0.5 * (mats + np.conj(np.swapaxes(mats, -1, -2)))
    tr = np.real(np.trace(h, axis1=-2, axis2=-1))
    scale = np.where(tr > 1e-12, tr, 1.0)
    h = h / scale[..., None, None]
    w, v = np.linalg.eigh(h)
    w = _project_simplex_rows(w)
    return np.einsum("...ij,...j,...kj->...ik", v, w, v.conj())


def project_physical(theta_hat, basis: Optional[OperatorBasis] = None) -> np.ndarray:
    """Physical density matrix nearest to the linear-inversion estimate."""
    theta_hat = np.asarray(theta_hat, float)
    if basis is None:
        basis = build_basis(int(round(np.log(theta_hat.size) / np.log(4))))
    return project_matrices(reconstruct(theta_hat, basis)[None])[0]


def fidelity(rho, rho_hat) -> float:
    """``Tr sqrt(sqrt(rho) rho_hat sqrt(rho))`` (not squared)."""
    rho = rho.rho if isinstance(rho, TargetState) else np.asarray(rho)
    s = sqrt_psd(rho)
    return float(np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(s @ rho_hat @ s), 0.0, None))))


def _fidelities(sqrt_rho: np.ndarray, rho_hats: np.ndarray) -> np.ndarray:
    m = sqrt_rho @ rho_hats @ sqrt_rho
    m = 0.5 * (m + np.conj(np.swapaxes(m, -1, -2)))
    return np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(m), 0.0, None)), axis=-1)


def conventional_povm_set(n_qubits: int = 2) -> PovmSet:
    """Product projectors onto {|0>, |1>, |+>, |i>} on each qubit (4^N elements)."""
    if n_qubits != 2:
        raise ValueError("the conventional reference set is defined for two qubits")
    ops = []
    for labels in itertools.product(("0", "1", "+", "i"), repeat=n_qubits):
        psi = np.ones(1, dtype=complex)
        for lab in labels:
            psi = np.kron(psi, SINGLE_QUBIT_STATES[lab])
        ops.append(np.outer(psi, psi.conj()))
    return PovmSet.from_operators(ops, label="conventional")


def target_state_grid(n_qubits: int = 2) -> list[TargetState]:
    """All products of the six single-qubit Pauli eigenstates (36 for two qubits)."""
    if n_qubits != 2:
        raise ValueError("the target grid is defined for two qubits")
    keys = list(SINGLE_QUBIT_STATES)
    return [TargetState.from_product(c) for c in itertools.product(keys, repeat=n_qubits)]


def reconstruct_state(povm: PovmSet, p_hat) -> np.ndarray:
    x = coefficient_matrix(povm)
    return project_physical(linear_invert(x, p_hat), build_basis(povm.n_qubits))


@dataclass
class StudyResult:
    """Infidelities of a Monte Carlo study.

    ``infidelity[t, s, r]`` is run ``r`` for target ``t`` at ``shots[s]``.
    """

    label: str
    entropy: float
    targets: list
    shots: list
    runs: int
    seed: int
    infidelity: np.ndarray = field(repr=False)

    def per_target(self) -> tuple[np.ndarray, np.ndarray]:
        ddof = 1 if self.runs > 1 else 0
        return self.infidelity.mean(axis=2), self.infidelity.std(axis=2, ddof=ddof)

    def mean(self) -> np.ndarray:
        """Mean infidelity per shots value over all targets and runs."""
        return self.infidelity.mean(axis=(0, 2))

    def std_across_targets(self) -> np.ndarray:
        """Spread of per-target mean infidelity, per shots value."""
        means, _ = self.per_target()
        ddof = 1 if len(self.targets) > 1 else 0
        return means.std(axis=0, ddof=ddof)

    def sem(self) -> np.ndarray:
        """Standard error of :meth:`mean` over all targets and runs."""
        flat = self.infidelity.transpose(1, 0, 2).reshape(len(self.shots), -1)
        return flat.std(axis=1, ddof=1) / np.sqrt(flat.shape[1])

    def rows(self, per_target: bool = False) -> list[dict]:
        out = []
        mean, std = self.mean(), self.std_across_targets()
        for s, shots in enumerate(self.shots):
            out.append(self._row("all", shots, mean[s], std[s]))
        if per_target:
            tm, ts = self.per_target()
            for t, target in enumerate(self.targets):
                for s, shots in enumerate(self.shots):
                    out.append(self._row(target.label, shots, tm[t, s], ts[t, s]))
        return out

    def _row(self, label, shots, mean, std) -> dict:
        return {
            "povm_set_id": self.label,
            "entropy": self.entropy,
            "target_label": label,
            "shots": int(shots),
            "mean_infidelity": float(mean),
            "std_infidelity": float(std),
            "runs": self.runs,
            "seed": self.seed,
        }


STUDY_COLUMNS = (
    "povm_set_id",
    "entropy",
    "target_label",
    "shots",
    "mean_infidelity",
    "std_infidelity",
    "runs",
    "seed",
)


def study_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STUDY_COLUMNS)
    for row in rows:
        w.writerow([format(row[c], ".17g") if isinstance(row[c], float) else row[c] for c in STUDY_COLUMNS])
    return buf.getvalue()


def run_monte_carlo(
    povm: PovmSet,
    targets: Optional[Sequence[TargetState]] = None,
    shots_grid: Sequence[int] = (100, 1000, 10_000, 100_000),
    runs: int = 100,
    seed: int = 0,
) -> StudyResult:
    """Noisy reconstructions of every target at every per-element shot budget.

    Run ``r`` for target ``t`` at shots index ``s`` draws from its own stream
    seeded by ``(seed, t, s, r)``.  Estimates ``counts / shots`` are inverted
    without truncation and then projected onto physical states.
    """
    if targets is None:
        targets = target_state_grid(povm.n_qubits)
    basis = build_basis(povm.n_qubits)
    x = coefficient_matrix(povm, basis)
    if rank_tol(x) < len(basis):
        raise RankDeficient(f"POVM set has rank {rank_tol(x)} < {len(basis)}")
    pinv = np.linalg.pinv(x)
    ops = povm.operators
    out = np.empty((len(targets), len(shots_grid), runs))
    for t, target in enumerate(targets):
        p = np.clip(np.real(np.einsum("ij,kji->k", target.rho, ops)), 0.0, None)
        sqrt_rho = sqrt_psd(target.rho)
        for s, shots in enumerate(shots_grid):
            counts = np.array([np.random.default_rng([seed, t, s, r]).poisson(shots * p) for r in range(runs)])
            theta = (counts / shots) @ pinv.T
            rho_hat = project_matrices(np.array([reconstruct(th, basis) for th in theta]))
            out[t, s] = 1.0 - _fidelities(sqrt_rho, rho_hat)
    return StudyResult(
        label=povm.label,
        entropy=entropy(gram(povm)),
        targets=list(targets),
        shots=[int(s) for s in shots_grid],
        runs=runs,
        seed=seed,
        infidelity=out,
    )

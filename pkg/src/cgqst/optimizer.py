"""Entropy maximization of CG-POVM sets over circuit parameters."""

from __future__ import annotations

import dataclasses
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize

from .circuit import CLASS_I, CLASS_II, CircuitLayout, brick_wall, circuit_unitaries, single_block_layout
from .linalg import rank_tol
from .povm import (
    PovmSet,
    coefficient_matrix,
    conjugate_many,
    error_magnitude,
    gram_from_operators,
    m_cg,
    offdiag_variance,
    spectrum_entropy,
)

log = logging.getLogger(__name__)

CONSTRUCTIONS = ("full-class2", "gate-efficient", "brick-wall", "class1-only")
METHODS = ("lbfgs", "nelder-mead")


class NoFeasiblePoint(RuntimeError):
    pass


@dataclass
class OptimizerConfig:
    n_qubits: int = 2
    construction: str = "full-class2"
    max_iters: int = 2000
    restarts: int = 32
    seed: int = 0
    rank_penalty_weight: float = 10.0
    # relative to the largest singular value of X
    min_singular_floor: float = 1e-3
    convergence_tol: float = 1e-10
    method: str = "lbfgs"
    layers: int = 1
    threads: int = 1

    def __post_init__(self):
        if self.rank_penalty_weight < 0:
            raise ValueError("rank_penalty_weight must be non-negative")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_iters < 0:
            raise ValueError("max_iters must be non-negative")
        if self.construction not in CONSTRUCTIONS:
            raise ValueError(f"unknown construction {self.construction!r}; pick one of {CONSTRUCTIONS}")
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; pick one of {METHODS}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def construction_layouts(config: OptimizerConfig) -> list[CircuitLayout]:
    """Per-element generator layouts; a complete set has 4^N elements."""
    n = config.n_qubits
    size = 4**n
    if config.construction == "full-class2":
        return [single_block_layout(n, CLASS_II)] * size
    if config.construction == "gate-efficient":
        if n != 2:
            raise ValueError("the gate-efficient construction is defined for two qubits")
        return [single_block_layout(2, CLASS_I)] * 7 + [single_block_layout(2, CLASS_II)] * 9
    if config.construction == "class1-only":
        return [single_block_layout(n, CLASS_I)] * size
    return [brick_wall(n, config.layers)] * size


class EntropyObjective:
    """Penalized Gram entropy as a function of the concatenated parameter vector."""

    def __init__(self, layouts, weight: float = 10.0, floor: float = 1e-3):
        self.layouts = list(layouts)
        self.n_qubits = self.layouts[0].n_qubits
        self.weight = weight
        self.floor = floor
        self.m = m_cg(self.n_qubits)
        self.full_rank = 4**self.n_qubits
        offsets = np.cumsum([0] + [lay.n_params for lay in self.layouts])
        self.slices = [slice(a, b) for a, b in zip(offsets[:-1], offsets[1:])]
        self.n_params = int(offsets[-1])
        groups: dict = {}
        for k, lay in enumerate(self.layouts):
            groups.setdefault(lay, []).append(k)
        self.groups = [
            (lay, np.array(ks), np.concatenate([np.arange(self.slices[k].start, self.slices[k].stop) for k in ks]))
            for lay, ks in groups.items()
        ]

    def split(self, flat) -> list[np.ndarray]:
        flat = np.asarray(flat, float)
        return [flat[s].copy() for s in self.slices]

    def operators(self, flat) -> np.ndarray:
        flat = np.asarray(flat, float)
        dim = 2**self.n_qubits
        ops = np.empty((len(self.layouts), dim, dim), dtype=complex)
        for lay, ks, cols in self.groups:
            p = flat[cols].reshape(len(ks), lay.n_params)
            ops[ks] = conjugate_many(self.m, circuit_unitaries(lay, p))
        return ops

    def evaluate(self, flat) -> dict:
        g = gram_from_operators(self.operators(flat))
        w = np.linalg.eigvalsh(g)[::-1]
        s = spectrum_entropy(w)
        sv = np.sqrt(np.clip(w[: min(len(w), self.full_rank)], 0.0, None))
        sigma_min = sv[-1] if len(w) >= self.full_rank else 0.0
        floor = self.floor * sv[0]
        penalty = max(0.0, floor - sigma_min) ** 2
        return {
            "entropy": s,
            "penalty": penalty,
            "objective": s - self.weight * penalty,
            "sigma_min": float(sigma_min),
            "sigma_max": float(sv[0]),
            "offdiag_variance": offdiag_variance(g),
        }

    def __call__(self, flat) -> float:
        return self.evaluate(flat)["objective"]

    def povm_set(self, flat, label: str = "") -> PovmSet:
        return PovmSet.from_circuits(self.layouts, self.split(flat), label=label)


def objective(config: OptimizerConfig, flat) -> float:
    obj = EntropyObjective(construction_layouts(config), config.rank_penalty_weight, config.min_singular_floor)
    return obj(flat)


@dataclass
class RestartResult:
    restart: int
    params: np.ndarray
    entropy: float
    objective: float
    rank: int
    sigma_min: float
    sigma_max: float
    error_magnitude: float
    history: list = field(default_factory=list)
    offdiag_history: list = field(default_factory=list)
    n_evals: int = 0

    def feasible(self, full_rank: int, floor: float) -> bool:
        return self.rank == full_rank and self.sigma_min > floor * self.sigma_max


@dataclass
class OptimizationReport:
    config: dict
    best_params: list
    best_entropy: float
    entropy_history: list
    rank_at_best: int
    error_magnitude_at_best: float
    best_restart: int
    restart_entropies: list
    offdiag_variance_history: list
    layouts: list = field(default_factory=list, repr=False)

    def povm_set(self, label: str = "optimized") -> PovmSet:
        return PovmSet.from_circuits(self.layouts, self.best_params, label=label)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "best_entropy": self.best_entropy,
            "best_restart": self.best_restart,
            "rank_at_best": self.rank_at_best,
            "error_magnitude_at_best": self.error_magnitude_at_best,
            "restart_entropies": self.restart_entropies,
            "entropy_history": self.entropy_history,
            "offdiag_variance_history": self.offdiag_variance_history,
            "best_params": [p.tolist() for p in self.best_params],
        }


def _run_restart(config: OptimizerConfig, restart: int) -> RestartResult:
    obj = EntropyObjective(construction_layouts(config), config.rank_penalty_weight, config.min_singular_floor)
    rng = np.random.default_rng([config.seed, restart])
    x0 = rng.uniform(0.0, 2 * np.pi, obj.n_params)

    first = obj.evaluate(x0)
    history = [first["entropy"]]
    offdiag = [first["offdiag_variance"]]
    best = {"x": x0, "obj": first["objective"], "info": first}

    def track(xk):
        info = obj.evaluate(xk)
        if info["objective"] >= best["obj"]:
            best.update(x=np.array(xk), obj=info["objective"], info=info)
            offdiag.append(info["offdiag_variance"])
        history.append(best["info"]["entropy"])

    n_evals = 1
    if config.max_iters > 0:
        fun = lambda x: -obj(x)  # noqa: E731
        if config.method == "lbfgs":
            res = minimize(
                fun,
                x0,
                method="L-BFGS-B",
                callback=track,
                options={"maxiter": config.max_iters, "ftol": config.convergence_tol, "gtol": 1e-9},
            )
        else:
            res = minimize(
                fun,
                x0,
                method="Nelder-Mead",
                callback=track,
                options={
                    "maxiter": config.max_iters,
                    "fatol": config.convergence_tol,
                    "xatol": 1e-8,
                    "adaptive": True,
                },
            )
        track(res.x)
        n_evals += res.nfev

    x = best["x"]
    info = best["info"]
    povm = obj.povm_set(x)
    xm = coefficient_matrix(povm)
    rank = rank_tol(xm)
    err = error_magnitude(xm) if rank == obj.full_rank else float("inf")
    return RestartResult(
        restart=restart,
        params=x,
        entropy=info["entropy"],
        objective=info["objective"],
        rank=rank,
        sigma_min=info["sigma_min"],
        sigma_max=info["sigma_max"],
        error_magnitude=err,
        history=history,
        offdiag_history=offdiag,
        n_evals=n_evals,
    )


def _selection_key(r: RestartResult):
    # highest entropy first, then lower error, then lower restart index
    return (-round(r.entropy, 12), r.error_magnitude, r.restart)


def optimize(config: OptimizerConfig) -> OptimizationReport:
    """Best-of-restarts entropy maximization.

    Each restart draws its initial angles from its own stream seeded by
    ``(seed, restart)``, so the result does not depend on ``threads``.
    """
    layouts = construction_layouts(config)
    full_rank = 4**config.n_qubits
    if config.threads > 1 and config.restarts > 1:
        with ProcessPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(_run_restart, [config] * config.restarts, range(config.restarts)))
    else:
        results = [_run_restart(config, r) for r in range(config.restarts)]

    for r in results:
        log.info("restart %d: entropy %.6f rank %d evals %d", r.restart, r.entropy, r.rank, r.n_evals)
    feasible = [r for r in results if r.feasible(full_rank, config.min_singular_floor)]
    if not feasible:
        raise NoFeasiblePoint(
            f"no restart reached rank {full_rank} with sigma_min above the floor "
            f"(best rank {max(r.rank for r in results)})"
        )
    best = min(feasible, key=_selection_key)
    obj = EntropyObjective(layouts)
    return OptimizationReport(
        config=config.to_dict(),
        best_params=obj.split(best.params),
        best_entropy=best.entropy,
        entropy_history=best.history,
        rank_at_best=best.rank,
        error_magnitude_at_best=best.error_magnitude,
        best_restart=best.restart,
        restart_entropies=[r.entropy for r in results],
        offdiag_variance_history=best.offdiag_history,
        layouts=layouts,
    )

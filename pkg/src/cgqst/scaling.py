"""N-qubit resource sweeps: minimum layers, rank versus two-qubit budget, minimum depth.

All checks use generic random circuit parameters: a Pauli component that is
structurally reachable shows up with nonzero weight for almost every draw, and
structural zeros stay at floating-point noise.
"""

from __future__ import annotations

import csv
import io
import itertools
import logging
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .circuit import CLASS_I, CLASS_II, CircuitLayout, brick_wall, brick_wall_slots, circuit_depth, circuit_unitaries
from .pauli import build_basis, decompose_many
from .povm import COVERAGE_TOL, conjugate_many, m_cg

log = logging.getLogger(__name__)


class CoverageNeverAchieved(RuntimeError):
    pass


@dataclass
class ScalingConfig:
    n_qubits: tuple = (2, 3, 4)
    samples_per_check: int = 64
    coverage_tol: float = COVERAGE_TOL
    seed: int = 0
    max_budget: Optional[int] = None
    rank_chunk: int = 16
    rank_tol: float = 1e-8
    max_layers: int = 64

    def __post_init__(self):
        if self.samples_per_check < 1:
            raise ValueError("samples_per_check must be at least 1")
        self.n_qubits = tuple(int(n) for n in self.n_qubits)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_qubits"] = list(self.n_qubits)
        return d


@dataclass
class ScalingRecord:
    n_qubits: int
    min_layers: int
    rank_curve: list = field(default_factory=list)
    first_full_rank_budget: Optional[int] = None
    min_depth: Optional[int] = None
    min_depth_layout: Optional[dict] = None


@dataclass
class ScalingResult:
    config: dict
    records: list

    def to_dict(self) -> dict:
        return {"config": self.config, "records": [asdict(r) for r in self.records]}


def _coefficients(layout: CircuitLayout, params: np.ndarray) -> np.ndarray:
    n = layout.n_qubits
    ops = conjugate_many(m_cg(n), circuit_unitaries(layout, params))
    return decompose_many(ops, build_basis(n), check=False)


def layout_coverage(layout: CircuitLayout, rng: np.random.Generator, samples: int, tol: float = COVERAGE_TOL,
                    chunk: int = 16) -> np.ndarray:
    """Union of Pauli components reached by ``samples`` random-parameter elements.

    All parameters are drawn up front, so stopping early once everything is
    covered does not change the outcome.
    """
    params = rng.uniform(0.0, 2 * np.pi, (samples, layout.n_params))
    covered = np.zeros(4**layout.n_qubits, dtype=bool)
    for start in range(0, samples, chunk):
        x = _coefficients(layout, params[start:start + chunk])
        covered |= (np.abs(x) > tol).any(axis=0)
        if covered.all():
            break
    return covered


def _brick_coverage(n: int, layers: int, config: ScalingConfig) -> np.ndarray:
    rng = np.random.default_rng([config.seed, n, layers])
    return layout_coverage(brick_wall(n, layers), rng, config.samples_per_check, config.coverage_tol)


def contract_layers(n_qubits: int, config: ScalingConfig) -> int:
    """Fewest brick-wall layers whose elements jointly cover every Pauli component.

    Starts at ``2N`` layers (doubling until covered) and removes layers until
    coverage fails.
    """
    layers = max(2 * n_qubits, 1)
    while not _brick_coverage(n_qubits, layers, config).all():
        layers *= 2
        if layers > config.max_layers:
            raise CoverageNeverAchieved(f"no coverage for N={n_qubits} up to {config.max_layers} layers")
    while layers > 1 and _brick_coverage(n_qubits, layers - 1, config).all():
        layers -= 1
    return layers


def _pair_positions(slots) -> list[tuple[int, int]]:
    return [(li, j) for li, layer in enumerate(slots) for j, s in enumerate(layer) if s[2] == 2]


def placement_layout(n_qubits: int, n_layers: int, class2: set, optional_on: Optional[set] = None) -> CircuitLayout:
    """Brick-wall layout with class-II blocks only at the chosen pair positions.

    Remaining pair positions and unpaired wires hold class-I blocks; with
    ``optional_on`` given, only those listed ``(layer, index)`` slots keep one.
    """
    slots = brick_wall_slots(n_qubits, n_layers)
    bad = set(class2) - set(_pair_positions(slots))
    if bad:
        raise ValueError(f"positions {sorted(bad)} are not two-qubit slots")
    layers = []
    for li, layer in enumerate(slots):
        out = []
        for j, (_, q, span) in enumerate(layer):
            if (li, j) in class2:
                out.append((CLASS_II, q, 2))
            elif optional_on is None or (li, j) in optional_on:
                out.append((CLASS_I, q, span))
        layers.append(out)
    return CircuitLayout.build(n_qubits, layers)


class SpanAccumulator:
    """Orthonormal row basis of the span of all coefficient rows seen so far."""

    def __init__(self, dim: int, tol: float = 1e-8):
        self.dim = dim
        self.tol = tol
        self.basis = np.zeros((0, dim))

    @property
    def rank(self) -> int:
        return self.basis.shape[0]

    def add(self, rows: np.ndarray) -> int:
        """Absorb rows; return how many new dimensions they contributed."""
        scale = float(np.max(np.linalg.norm(rows, axis=1))) if len(rows) else 0.0
        if scale == 0.0:
            return 0
        r = rows.copy()
        for _ in range(2):
            r -= (r @ self.basis.T) @ self.basis
        _, s, vt = np.linalg.svd(r, full_matrices=False)
        new = vt[s > self.tol * scale]
        if len(new):
            new -= (new @ self.basis.T) @ self.basis
            q, _ = np.linalg.qr(new.T)
            self.basis = np.vstack([self.basis, q.T])
        return len(new)


def rank_vs_two_qubit_gates(n_qubits: int, config: ScalingConfig, min_layers: Optional[int] = None) -> list[tuple[int, int]]:
    """Maximum rank of X over sets whose generators use at most ``g`` class-II blocks.

    Generators live in the minimum-layer brick-wall; for each budget every
    placement of exactly ``g`` class-II blocks is sampled until a chunk of
    fresh draws adds nothing to the accumulated span.
    """
    if min_layers is None:
        min_layers = contract_layers(n_qubits, config)
    positions = _pair_positions(brick_wall_slots(n_qubits, min_layers))
    top = len(positions) if config.max_budget is None else min(config.max_budget, len(positions))
    full = 4**n_qubits
    acc = SpanAccumulator(full, config.rank_tol)
    curve = []
    for g in range(top + 1):
        if acc.rank < full:
            for idx, chosen in enumerate(itertools.combinations(positions, g)):
                layout = placement_layout(n_qubits, min_layers, set(chosen))
                rng = np.random.default_rng([config.seed, n_qubits, g, idx])
                # a placement's span has at most `full` dimensions
                for _ in range(full // config.rank_chunk + 2):
                    params = rng.uniform(0.0, 2 * np.pi, (config.rank_chunk, layout.n_params))
                    if acc.add(_coefficients(layout, params)) == 0:
                        break
                if acc.rank == full:
                    break
        curve.append((g, acc.rank))
        log.info("N=%d budget %d: rank %d / %d", n_qubits, g, acc.rank, full)
    return curve


def min_depth(n_qubits: int, config: ScalingConfig, min_layers: Optional[int] = None,
              budget: Optional[int] = None) -> tuple[int, CircuitLayout]:
    """Shallowest minimum-layer layout with ``2N - 3`` class-II blocks that keeps full coverage.

    Searches every class-II placement and every subset of the remaining
    class-I slots, in increasing order of depth, with branch-and-bound pruning.
    """
    if min_layers is None:
        min_layers = contract_layers(n_qubits, config)
    if budget is None:
        budget = max(0, 2 * n_qubits - 3)
    slots = brick_wall_slots(n_qubits, min_layers)
    positions = _pair_positions(slots)
    if budget > len(positions):
        raise CoverageNeverAchieved(f"{min_layers} layers hold only {len(positions)} two-qubit slots")
    everything = {(li, j) for li, layer in enumerate(slots) for j in range(len(layer))}

    placements = []
    for chosen in itertools.combinations(positions, budget):
        chosen = set(chosen)
        bare = placement_layout(n_qubits, min_layers, chosen, optional_on=set())
        placements.append((circuit_depth(bare), sorted(chosen)))
    placements.sort()

    best: Optional[tuple[int, CircuitLayout]] = None
    checks = 0

    def covers(layout: CircuitLayout) -> bool:
        nonlocal checks
        checks += 1
        rng = np.random.default_rng([config.seed, n_qubits, checks])
        return bool(layout_coverage(layout, rng, config.samples_per_check, config.coverage_tol).all())

    for lower, chosen in placements:
        if best is not None and lower >= best[0]:
            break
        chosen = set(chosen)
        optional = sorted(everything - chosen)
        full_layout = placement_layout(n_qubits, min_layers, chosen)
        # dropping class-I blocks only shrinks the reachable family
        if not covers(full_layout):
            continue
        variants = []
        for mask in itertools.product((0, 1), repeat=len(optional)):
            on = {o for o, m in zip(optional, mask) if m}
            lay = placement_layout(n_qubits, min_layers, chosen, optional_on=on)
            variants.append((circuit_depth(lay), sum(mask), mask, lay))
        variants.sort(key=lambda v: (v[0], v[1], v[2]))
        for depth, _, _, lay in variants:
            if best is not None and depth >= best[0]:
                break
            if covers(lay):
                best = (depth, lay)
                break
    if best is None:
        raise CoverageNeverAchieved(f"no layout with {budget} two-qubit gates covers N={n_qubits}")
    log.info("N=%d min depth %d after %d coverage checks", n_qubits, best[0], checks)
    return best


def run_scaling(config: ScalingConfig, rank_max_qubits: int = 4, depth_max_qubits: int = 6) -> ScalingResult:
    records = []
    for n in config.n_qubits:
        layers = contract_layers(n, config)
        rec = ScalingRecord(n_qubits=n, min_layers=layers)
        if n <= rank_max_qubits:
            rec.rank_curve = rank_vs_two_qubit_gates(n, config, layers)
            rec.first_full_rank_budget = next((g for g, r in rec.rank_curve if r == 4**n), None)
        if n <= depth_max_qubits:
            depth, layout = min_depth(n, config, layers)
            rec.min_depth = depth
            rec.min_depth_layout = layout.to_dict()
        records.append(rec)
    return ScalingResult(config=config.to_dict(), records=records)


SCALING_COLUMNS = ("n_qubits", "metric", "budget", "value", "seed", "samples")


def scaling_csv(result: ScalingResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCALING_COLUMNS)
    seed = result.config["seed"]
    samples = result.config["samples_per_check"]
    for rec in result.records:
        w.writerow([rec.n_qubits, "min_layers", "", rec.min_layers, seed, samples])
        for g, r in rec.rank_curve:
            w.writerow([rec.n_qubits, "max_rank", g, r, seed, samples])
        if rec.rank_curve:
            ffr = "" if rec.first_full_rank_budget is None else rec.first_full_rank_budget
            w.writerow([rec.n_qubits, "first_full_rank_budget", "", ffr, seed, samples])
        if rec.min_depth is not None:
            w.writerow([rec.n_qubits, "min_depth", "", rec.min_depth, seed, samples])
    return buf.getvalue()

"""Coarse-grained POVM construction, entropy optimization and tomography."""

from .circuit import CLASS_I, CLASS_II, BlockKind, CircuitLayout, GateBlock, brick_wall, circuit_depth, circuit_unitary
from .optimizer import NoFeasiblePoint, OptimizationReport, OptimizerConfig, optimize
from .pauli import OperatorBasis, build_basis, decompose, reconstruct
from .povm import PovmSet, coefficient_matrix, entropy, error_magnitude, gram, m_cg, pauli_coverage
from .scaling import CoverageNeverAchieved, ScalingConfig, run_scaling
from .tomography import (
    TargetState,
    conventional_povm_set,
    fidelity,
    linear_invert,
    project_physical,
    run_monte_carlo,
    target_state_grid,
)

__version__ = "0.1.0"
